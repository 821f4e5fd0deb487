use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A user-declared finite enumeration sort.
///
/// Constructor lists are non-empty and duplicate-free; [`EnumSort::new`]
/// rejects anything else.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnumSort {
    pub name: String,
    pub constructors: Vec<String>,
}

impl EnumSort {
    pub fn new(
        name: impl Into<String>,
        constructors: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Arc<EnumSort>, ExprErrorKind> {
        let name = name.into();
        let constructors: Vec<String> = constructors.into_iter().map(Into::into).collect();
        if constructors.is_empty() {
            return Err(ExprErrorKind::EmptyEnum(name));
        }
        for (i, c) in constructors.iter().enumerate() {
            if constructors[..i].contains(c) {
                return Err(ExprErrorKind::DuplicateConstructor(name, c.clone()));
            }
        }
        Ok(Arc::new(EnumSort { name, constructors }))
    }

    pub fn index_of(&self, constructor: &str) -> Option<usize> {
        self.constructors.iter().position(|c| c == constructor)
    }
}

// Construction errors for enum sorts; folded into `ExprError` by the caller.
#[derive(Debug)]
pub enum ExprErrorKind {
    EmptyEnum(String),
    DuplicateConstructor(String, String),
}

/// A data sort. `Bool` and `Nat` are built in; everything else is a finite
/// enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Nat,
    Enum(Arc<EnumSort>),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Nat => write!(f, "Nat"),
            Sort::Enum(e) => write!(f, "{}", e.name),
        }
    }
}

/// A closed semantic value: a boolean, a natural number, or an enumeration
/// constructor.
///
/// Equality, ordering and hashing of constructors go by constructor name, so
/// a value read back from an AUT file compares equal to the value that
/// produced it. Constructor names are globally unique within a
/// specification.
#[derive(Debug, Clone)]
pub enum Value {
    Bool(bool),
    Nat(u64),
    Ctor(Arc<EnumSort>, usize),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Bool(_) => Sort::Bool,
            Value::Nat(_) => Sort::Nat,
            Value::Ctor(e, _) => Sort::Enum(e.clone()),
        }
    }

    pub fn constructor_name(&self) -> Option<&str> {
        match self {
            Value::Ctor(e, i) => Some(&e.constructors[*i]),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Nat(_) => 1,
            Value::Ctor(..) => 2,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Nat(a), Value::Nat(b)) => a == b,
            (Value::Ctor(..), Value::Ctor(..)) => {
                self.constructor_name() == other.constructor_name()
            }
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Bool(b) => b.hash(state),
            Value::Nat(n) => n.hash(state),
            Value::Ctor(..) => self.constructor_name().hash(state),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Nat(a), Value::Nat(b)) => a.cmp(b),
            (Value::Ctor(..), Value::Ctor(..)) => {
                self.constructor_name().cmp(&other.constructor_name())
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Ctor(e, i) => write!(f, "{}", e.constructors[*i]),
        }
    }
}

/// The (possibly truncated) enumeration of a sort's domain.
#[derive(Debug, Clone)]
pub struct SortValues {
    pub values: Vec<Value>,
    /// True when the listed values do not cover the whole domain. `Nat` is
    /// always truncated; finite sorts never are.
    pub truncated: bool,
}

/// Lists the domain of a sort in a fixed order: `false` before `true` for
/// `Bool`, declaration order for enumerations, and `0..=nat_bound` for `Nat`
/// together with a truncation marker.
pub fn enumerate_sort(sort: &Sort, nat_bound: u64) -> SortValues {
    match sort {
        Sort::Bool => SortValues {
            values: vec![Value::Bool(false), Value::Bool(true)],
            truncated: false,
        },
        Sort::Nat => SortValues {
            values: (0..=nat_bound).map(Value::Nat).collect(),
            truncated: true,
        },
        Sort::Enum(e) => SortValues {
            values: (0..e.constructors.len())
                .map(|i| Value::Ctor(e.clone(), i))
                .collect(),
            truncated: false,
        },
    }
}
