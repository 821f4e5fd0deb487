use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use super::sort::{ExprErrorKind, Sort, Value};

/// Errors raised while sort-checking, substituting or evaluating
/// expressions.
#[derive(Debug, Error)]
pub enum ExprError {
    #[error("unbound variable '{0}'")]
    UnboundVariable(String),

    #[error("sort mismatch in {context}: expected {expected}, found {found}")]
    SortMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("natural number overflow")]
    Overflow,

    #[error("enumeration '{0}' has no constructors")]
    EmptyEnum(String),

    #[error("enumeration '{0}' declares constructor '{1}' twice")]
    DuplicateConstructor(String, String),
}

impl From<ExprErrorKind> for ExprError {
    fn from(kind: ExprErrorKind) -> Self {
        match kind {
            ExprErrorKind::EmptyEnum(n) => ExprError::EmptyEnum(n),
            ExprErrorKind::DuplicateConstructor(n, c) => ExprError::DuplicateConstructor(n, c),
        }
    }
}

fn mismatch(context: impl Into<String>, expected: impl fmt::Display, found: &Sort) -> ExprError {
    ExprError::SortMismatch {
        context: context.into(),
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Binary operators. Logical operators act on `Bool`, comparisons and
/// arithmetic on `Nat`, and equality on any pair of equal sorts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Equals,
    Less,
    LessEq,
    Greater,
    Plus,
    Monus,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "=>",
            BinOp::Equals => "==",
            BinOp::Less => "<",
            BinOp::LessEq => "<=",
            BinOp::Greater => ">",
            BinOp::Plus => "+",
            BinOp::Monus => "-",
        }
    }

    // Binding strength for the printer; higher binds tighter.
    fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Equals | BinOp::Less | BinOp::LessEq | BinOp::Greater => 4,
            BinOp::Plus | BinOp::Monus => 5,
        }
    }
}

/// An immutable data expression tree.
///
/// Variables carry their declared sort, which keeps sort inference local.
/// Subtraction on `Nat` is monus: it floors at zero, so `Nat` is closed
/// under the whole operator set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expression {
    Var(String, Sort),
    Lit(Value),
    Not(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    If(Box<Expression>, Box<Expression>, Box<Expression>),
}

impl Expression {
    pub fn var(name: impl Into<String>, sort: Sort) -> Self {
        Expression::Var(name.into(), sort)
    }

    pub fn nat(n: u64) -> Self {
        Expression::Lit(Value::Nat(n))
    }

    pub fn boolean(b: bool) -> Self {
        Expression::Lit(Value::Bool(b))
    }

    pub fn lit(v: Value) -> Self {
        Expression::Lit(v)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Expression::Not(Box::new(self))
    }

    pub fn binary(op: BinOp, lhs: Self, rhs: Self) -> Self {
        Expression::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn and(self, rhs: Self) -> Self {
        Self::binary(BinOp::And, self, rhs)
    }

    pub fn or(self, rhs: Self) -> Self {
        Self::binary(BinOp::Or, self, rhs)
    }

    pub fn implies(self, rhs: Self) -> Self {
        Self::binary(BinOp::Implies, self, rhs)
    }

    pub fn equals(self, rhs: Self) -> Self {
        Self::binary(BinOp::Equals, self, rhs)
    }

    pub fn less(self, rhs: Self) -> Self {
        Self::binary(BinOp::Less, self, rhs)
    }

    pub fn less_eq(self, rhs: Self) -> Self {
        Self::binary(BinOp::LessEq, self, rhs)
    }

    pub fn greater(self, rhs: Self) -> Self {
        Self::binary(BinOp::Greater, self, rhs)
    }

    pub fn plus(self, rhs: Self) -> Self {
        Self::binary(BinOp::Plus, self, rhs)
    }

    pub fn monus(self, rhs: Self) -> Self {
        Self::binary(BinOp::Monus, self, rhs)
    }

    pub fn ite(cond: Self, then: Self, els: Self) -> Self {
        Expression::If(Box::new(cond), Box::new(then), Box::new(els))
    }

    /// The set of free variable names. Every variable in an expression is
    /// free; binders live in the surrounding process structure.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut out);
        out
    }

    fn collect_free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expression::Var(name, _) => {
                out.insert(name.clone());
            }
            Expression::Lit(_) => {}
            Expression::Not(e) => e.collect_free_vars(out),
            Expression::Binary(_, l, r) => {
                l.collect_free_vars(out);
                r.collect_free_vars(out);
            }
            Expression::If(c, t, e) => {
                c.collect_free_vars(out);
                t.collect_free_vars(out);
                e.collect_free_vars(out);
            }
        }
    }

    /// Free variables together with the sorts they are used at.
    pub fn typed_vars(&self) -> BTreeMap<String, BTreeSet<Sort>> {
        let mut out = BTreeMap::new();
        self.collect_typed_vars(&mut out);
        out
    }

    fn collect_typed_vars(&self, out: &mut BTreeMap<String, BTreeSet<Sort>>) {
        match self {
            Expression::Var(name, sort) => {
                out.entry(name.clone()).or_default().insert(sort.clone());
            }
            Expression::Lit(_) => {}
            Expression::Not(e) => e.collect_typed_vars(out),
            Expression::Binary(_, l, r) => {
                l.collect_typed_vars(out);
                r.collect_typed_vars(out);
            }
            Expression::If(c, t, e) => {
                c.collect_typed_vars(out);
                t.collect_typed_vars(out);
                e.collect_typed_vars(out);
            }
        }
    }

    /// Infers the sort of the expression and checks well-sortedness along
    /// the way: operator arguments must match, both sides of `==` must share
    /// a sort, and both branches of `if` must share a sort.
    pub fn sort_of(&self) -> Result<Sort, ExprError> {
        match self {
            Expression::Var(_, sort) => Ok(sort.clone()),
            Expression::Lit(v) => Ok(v.sort()),
            Expression::Not(e) => {
                let s = e.sort_of()?;
                if s != Sort::Bool {
                    return Err(mismatch("operand of !", Sort::Bool, &s));
                }
                Ok(Sort::Bool)
            }
            Expression::Binary(op, l, r) => {
                let ls = l.sort_of()?;
                let rs = r.sort_of()?;
                match op {
                    BinOp::And | BinOp::Or | BinOp::Implies => {
                        for s in [&ls, &rs] {
                            if *s != Sort::Bool {
                                return Err(mismatch(
                                    format!("operand of {}", op.symbol()),
                                    Sort::Bool,
                                    s,
                                ));
                            }
                        }
                        Ok(Sort::Bool)
                    }
                    BinOp::Equals => {
                        if ls != rs {
                            return Err(mismatch("right operand of ==", ls, &rs));
                        }
                        Ok(Sort::Bool)
                    }
                    BinOp::Less | BinOp::LessEq | BinOp::Greater => {
                        for s in [&ls, &rs] {
                            if *s != Sort::Nat {
                                return Err(mismatch(
                                    format!("operand of {}", op.symbol()),
                                    Sort::Nat,
                                    s,
                                ));
                            }
                        }
                        Ok(Sort::Bool)
                    }
                    BinOp::Plus | BinOp::Monus => {
                        for s in [&ls, &rs] {
                            if *s != Sort::Nat {
                                return Err(mismatch(
                                    format!("operand of {}", op.symbol()),
                                    Sort::Nat,
                                    s,
                                ));
                            }
                        }
                        Ok(Sort::Nat)
                    }
                }
            }
            Expression::If(c, t, e) => {
                let cs = c.sort_of()?;
                if cs != Sort::Bool {
                    return Err(mismatch("condition of if", Sort::Bool, &cs));
                }
                let ts = t.sort_of()?;
                let es = e.sort_of()?;
                if ts != es {
                    return Err(mismatch("else branch of if", ts, &es));
                }
                Ok(ts)
            }
        }
    }

    /// Evaluates the expression under an environment binding every free
    /// variable to a value of its sort.
    pub fn evaluate(&self, env: &Environment) -> Result<Value, ExprError> {
        match self {
            Expression::Var(name, sort) => {
                let value = env
                    .get(name)
                    .ok_or_else(|| ExprError::UnboundVariable(name.clone()))?;
                let found = value.sort();
                if found != *sort {
                    return Err(mismatch(format!("binding for '{name}'"), sort, &found));
                }
                Ok(value.clone())
            }
            Expression::Lit(v) => Ok(v.clone()),
            Expression::Not(e) => Ok(Value::Bool(!e.eval_bool(env)?)),
            Expression::Binary(op, l, r) => match op {
                // && and || are not short-circuiting: both operands must be
                // well-defined, which surfaces unbound variables reliably.
                BinOp::And => Ok(Value::Bool(l.eval_bool(env)? & r.eval_bool(env)?)),
                BinOp::Or => Ok(Value::Bool(l.eval_bool(env)? | r.eval_bool(env)?)),
                BinOp::Implies => Ok(Value::Bool(!l.eval_bool(env)? | r.eval_bool(env)?)),
                BinOp::Equals => {
                    let lv = l.evaluate(env)?;
                    let rv = r.evaluate(env)?;
                    if lv.sort() != rv.sort() {
                        return Err(mismatch("right operand of ==", lv.sort(), &rv.sort()));
                    }
                    Ok(Value::Bool(lv == rv))
                }
                BinOp::Less => Ok(Value::Bool(l.eval_nat(env)? < r.eval_nat(env)?)),
                BinOp::LessEq => Ok(Value::Bool(l.eval_nat(env)? <= r.eval_nat(env)?)),
                BinOp::Greater => Ok(Value::Bool(l.eval_nat(env)? > r.eval_nat(env)?)),
                BinOp::Plus => l
                    .eval_nat(env)?
                    .checked_add(r.eval_nat(env)?)
                    .map(Value::Nat)
                    .ok_or(ExprError::Overflow),
                BinOp::Monus => Ok(Value::Nat(
                    l.eval_nat(env)?.saturating_sub(r.eval_nat(env)?),
                )),
            },
            Expression::If(c, t, e) => {
                if c.eval_bool(env)? {
                    t.evaluate(env)
                } else {
                    e.evaluate(env)
                }
            }
        }
    }

    pub fn eval_bool(&self, env: &Environment) -> Result<bool, ExprError> {
        match self.evaluate(env)? {
            Value::Bool(b) => Ok(b),
            v => Err(mismatch("boolean context", Sort::Bool, &v.sort())),
        }
    }

    pub fn eval_nat(&self, env: &Environment) -> Result<u64, ExprError> {
        match self.evaluate(env)? {
            Value::Nat(n) => Ok(n),
            v => Err(mismatch("numeric context", Sort::Nat, &v.sort())),
        }
    }

    /// Simultaneous substitution: every occurrence of a mapped variable is
    /// replaced by its image, and replacements are not substituted into
    /// again. Each replacement must have the sort of the variable it
    /// replaces.
    pub fn substitute(
        &self,
        map: &BTreeMap<String, Expression>,
    ) -> Result<Expression, ExprError> {
        match self {
            Expression::Var(name, sort) => match map.get(name) {
                Some(replacement) => {
                    let rs = replacement.sort_of()?;
                    if rs != *sort {
                        return Err(mismatch(format!("substitution for '{name}'"), sort, &rs));
                    }
                    Ok(replacement.clone())
                }
                None => Ok(self.clone()),
            },
            Expression::Lit(_) => Ok(self.clone()),
            Expression::Not(e) => Ok(e.substitute(map)?.not()),
            Expression::Binary(op, l, r) => {
                Ok(Self::binary(*op, l.substitute(map)?, r.substitute(map)?))
            }
            Expression::If(c, t, e) => Ok(Self::ite(
                c.substitute(map)?,
                t.substitute(map)?,
                e.substitute(map)?,
            )),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        match self {
            Expression::Var(name, _) => write!(f, "{name}"),
            Expression::Lit(v) => write!(f, "{v}"),
            Expression::Not(e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 6)
            }
            Expression::Binary(op, l, r) => {
                let prec = op.precedence();
                if parent > prec {
                    write!(f, "(")?;
                }
                l.fmt_prec(f, prec + 1)?;
                write!(f, " {} ", op.symbol())?;
                // => is right-associative, everything else left.
                r.fmt_prec(f, if *op == BinOp::Implies { prec } else { prec + 1 })?;
                if parent > prec {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expression::If(c, t, e) => {
                write!(f, "if(")?;
                c.fmt_prec(f, 0)?;
                write!(f, ", ")?;
                t.fmt_prec(f, 0)?;
                write!(f, ", ")?;
                e.fmt_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// A variable environment. Conceptually total (the semantics assume every
/// variable has some value) but stored partially; evaluating a variable
/// without a binding is an error rather than a default, so missing bindings
/// surface as bugs.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    bindings: HashMap<String, Value>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        self.bindings.insert(name.into(), value);
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Self {
        self.bind(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Value)>) -> Self {
        let mut env = Self::new();
        for (name, value) in pairs {
            env.bind(name, value);
        }
        env
    }
}

/// Enumerates every environment over the given variables, each ranging over
/// its (possibly truncated) sort domain. The order is fixed: the last
/// variable varies fastest, domains in [`super::enumerate_sort`] order.
/// Returns the environments and whether any domain was truncated.
pub fn enumerate_environments(
    vars: &[(String, Sort)],
    nat_bound: u64,
) -> (Vec<Environment>, bool) {
    let domains: Vec<_> = vars
        .iter()
        .map(|(_, sort)| super::enumerate_sort(sort, nat_bound))
        .collect();
    let truncated = domains.iter().any(|d| d.truncated);

    let total: usize = domains.iter().map(|d| d.values.len()).product();
    let mut envs = Vec::with_capacity(total);
    let mut choice = vec![0usize; domains.len()];
    'outer: loop {
        let mut env = Environment::new();
        for ((name, _), (domain, &index)) in vars.iter().zip(domains.iter().zip(choice.iter())) {
            env.bind(name.clone(), domain.values[index].clone());
        }
        envs.push(env);
        for position in (0..choice.len()).rev() {
            choice[position] += 1;
            if choice[position] < domains[position].values.len() {
                continue 'outer;
            }
            choice[position] = 0;
        }
        break;
    }
    (envs, truncated)
}
