//! The textual specification language.
//!
//! A specification declares enumeration sorts, actions with their argument
//! sorts, exactly one process and one initial instance, and optionally named
//! composition expressions over that process:
//!
//! ```text
//! act count; act toggle;
//! proc Machine(n: Nat, s: Bool) =
//!     (n > 0)  -> count  . Machine(n - 1, s)
//!   + (n == 0) -> toggle . Machine(if(!s, 3, 1), !s);
//! init Machine(0, false);
//! ```
//!
//! Summands are `sum v: Sort, ... . condition -> multiaction . Name(updates)`
//! with the `sum` prefix optional, multi-actions are `tau` or `a(args)`
//! factors joined by `|`, and `%` starts a line comment. Declarations are
//! processed in file order, so sorts and actions come before the process
//! that uses them.

mod lexer;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::compose::{label_multiset, CommRule, CompositionExpr};
use crate::data::{EnumSort, Expression, Sort, Value};
use crate::lpe::{
    validate_lpe, ActionExpr, Lpe, MultiActionExpr, ProcessInstance, Summand,
};
use lexer::{tokenize, Pos, Tok};

/// Errors from reading a specification, partition or expression document.
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("parse error at {pos}: {message}")]
    Parse { pos: Pos, message: String },

    #[error("name error at {pos}: {message}")]
    Name { pos: Pos, message: String },

    #[error("sort error at {pos}: {message}")]
    Sort { pos: Pos, message: String },

    #[error("invalid specification: {message}")]
    Validation { message: String },
}

/// A parsed specification document.
#[derive(Debug, Clone)]
pub struct SpecFile {
    pub sorts: BTreeMap<String, Arc<EnumSort>>,
    pub process: Arc<Lpe>,
    pub init: ProcessInstance,
    pub compositions: BTreeMap<String, CompositionExpr>,
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    index: usize,
    sorts: BTreeMap<String, Arc<EnumSort>>,
    constructors: BTreeMap<String, (Arc<EnumSort>, usize)>,
    actions: BTreeMap<String, Vec<Sort>>,
}

type Parsed<T> = Result<T, SpecError>;

impl Parser {
    fn new(text: &str) -> Parsed<Self> {
        let tokens = tokenize(text).map_err(|(pos, message)| SpecError::Parse { pos, message })?;
        Ok(Parser {
            tokens,
            index: 0,
            sorts: BTreeMap::new(),
            constructors: BTreeMap::new(),
            actions: BTreeMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.index].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.index].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let entry = self.tokens[self.index].clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        entry
    }

    fn error<T>(&self, message: impl Into<String>) -> Parsed<T> {
        Err(SpecError::Parse {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Parsed<Pos> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Parsed<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.next().1;
                Ok((name, pos))
            }
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    fn resolve_sort(&self, name: &str, pos: Pos) -> Parsed<Sort> {
        match name {
            "Bool" => Ok(Sort::Bool),
            "Nat" => Ok(Sort::Nat),
            _ => self
                .sorts
                .get(name)
                .map(|e| Sort::Enum(e.clone()))
                .ok_or_else(|| SpecError::Name {
                    pos,
                    message: format!("unknown sort '{name}'"),
                }),
        }
    }

    fn sort_ref(&mut self) -> Parsed<Sort> {
        let (name, pos) = self.ident("a sort name")?;
        self.resolve_sort(&name, pos)
    }

    // sort Name = struct c1 | c2 | ... ;
    fn sort_decl(&mut self) -> Parsed<()> {
        self.expect(Tok::Sort)?;
        let (name, pos) = self.ident("a sort name")?;
        if name == "Bool" || name == "Nat" || self.sorts.contains_key(&name) {
            return Err(SpecError::Name {
                pos,
                message: format!("sort '{name}' already declared"),
            });
        }
        self.expect(Tok::Assign)?;
        self.expect(Tok::Struct)?;
        let mut constructors = Vec::new();
        loop {
            let (ctor, ctor_pos) = self.ident("a constructor name")?;
            if self.constructors.contains_key(&ctor) {
                return Err(SpecError::Name {
                    pos: ctor_pos,
                    message: format!("constructor '{ctor}' already declared"),
                });
            }
            constructors.push(ctor);
            if !self.eat(Tok::Pipe) {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        let declared = EnumSort::new(name.clone(), constructors).map_err(|e| SpecError::Sort {
            pos,
            message: crate::data::ExprError::from(e).to_string(),
        })?;
        for (i, ctor) in declared.constructors.iter().enumerate() {
            self.constructors
                .insert(ctor.clone(), (declared.clone(), i));
        }
        self.sorts.insert(name, declared);
        Ok(())
    }

    // act name [: Sort (# Sort)*] ;
    fn act_decl(&mut self) -> Parsed<()> {
        self.expect(Tok::Act)?;
        let (name, pos) = self.ident("an action name")?;
        if self.actions.contains_key(&name) {
            return Err(SpecError::Name {
                pos,
                message: format!("action '{name}' already declared"),
            });
        }
        let mut signature = Vec::new();
        if self.eat(Tok::Colon) {
            signature.push(self.sort_ref()?);
            while self.eat(Tok::Hash) {
                signature.push(self.sort_ref()?);
            }
        }
        self.expect(Tok::Semi)?;
        self.actions.insert(name, signature);
        Ok(())
    }

    // Scope for expression parsing: parameters, then sum variables.
    fn resolve_var<'s>(
        &self,
        name: &str,
        scopes: &'s [&[(String, Sort)]],
    ) -> Option<&'s (String, Sort)> {
        scopes
            .iter()
            .rev()
            .find_map(|vars| vars.iter().find(|(n, _)| n == name))
    }

    fn atom(&mut self, scopes: &[&[(String, Sort)]]) -> Parsed<Expression> {
        match self.peek().clone() {
            Tok::True => {
                self.next();
                Ok(Expression::boolean(true))
            }
            Tok::False => {
                self.next();
                Ok(Expression::boolean(false))
            }
            Tok::Number(n) => {
                self.next();
                Ok(Expression::nat(n))
            }
            Tok::If => {
                self.next();
                self.expect(Tok::LParen)?;
                let cond = self.expr(scopes)?;
                self.expect(Tok::Comma)?;
                let then = self.expr(scopes)?;
                self.expect(Tok::Comma)?;
                let els = self.expr(scopes)?;
                self.expect(Tok::RParen)?;
                Ok(Expression::ite(cond, then, els))
            }
            Tok::LParen => {
                self.next();
                let inner = self.expr(scopes)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let pos = self.next().1;
                if let Some((name, sort)) = self.resolve_var(&name, scopes) {
                    return Ok(Expression::var(name.clone(), sort.clone()));
                }
                if let Some((sort, index)) = self.constructors.get(&name) {
                    return Ok(Expression::lit(Value::Ctor(sort.clone(), *index)));
                }
                Err(SpecError::Name {
                    pos,
                    message: format!("unknown variable or constructor '{name}'"),
                })
            }
            other => self.error(format!("expected an expression, found {other}")),
        }
    }

    fn unary(&mut self, scopes: &[&[(String, Sort)]]) -> Parsed<Expression> {
        if self.eat(Tok::Bang) {
            Ok(self.unary(scopes)?.not())
        } else {
            self.atom(scopes)
        }
    }

    fn additive(&mut self, scopes: &[&[(String, Sort)]]) -> Parsed<Expression> {
        let mut lhs = self.unary(scopes)?;
        loop {
            if self.eat(Tok::Plus) {
                lhs = lhs.plus(self.unary(scopes)?);
            } else if self.eat(Tok::Minus) {
                lhs = lhs.monus(self.unary(scopes)?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn comparison(&mut self, scopes: &[&[(String, Sort)]]) -> Parsed<Expression> {
        let lhs = self.additive(scopes)?;
        let expr = if self.eat(Tok::EqEq) {
            lhs.equals(self.additive(scopes)?)
        } else if self.eat(Tok::Lt) {
            lhs.less(self.additive(scopes)?)
        } else if self.eat(Tok::Le) {
            lhs.less_eq(self.additive(scopes)?)
        } else if self.eat(Tok::Gt) {
            lhs.greater(self.additive(scopes)?)
        } else if self.eat(Tok::Ge) {
            // a >= b is b <= a.
            self.additive(scopes)?.less_eq(lhs)
        } else {
            lhs
        };
        Ok(expr)
    }

    fn conjunction(&mut self, scopes: &[&[(String, Sort)]]) -> Parsed<Expression> {
        let mut lhs = self.comparison(scopes)?;
        while self.eat(Tok::AmpAmp) {
            lhs = lhs.and(self.comparison(scopes)?);
        }
        Ok(lhs)
    }

    fn disjunction(&mut self, scopes: &[&[(String, Sort)]]) -> Parsed<Expression> {
        let mut lhs = self.conjunction(scopes)?;
        while self.eat(Tok::PipePipe) {
            lhs = lhs.or(self.conjunction(scopes)?);
        }
        Ok(lhs)
    }

    fn expr(&mut self, scopes: &[&[(String, Sort)]]) -> Parsed<Expression> {
        let lhs = self.disjunction(scopes)?;
        if self.eat(Tok::FatArrow) {
            // Right-associative.
            Ok(lhs.implies(self.expr(scopes)?))
        } else {
            Ok(lhs)
        }
    }

    fn check_sort(&self, expr: &Expression, expected: Option<&Sort>, pos: Pos) -> Parsed<Sort> {
        let sort = expr.sort_of().map_err(|e| SpecError::Sort {
            pos,
            message: e.to_string(),
        })?;
        if let Some(expected) = expected {
            if sort != *expected {
                return Err(SpecError::Sort {
                    pos,
                    message: format!("expected {expected}, found {sort}"),
                });
            }
        }
        Ok(sort)
    }

    // name: Sort (, name: Sort)*
    fn binders(&mut self, taken: &[(String, Sort)]) -> Parsed<Vec<(String, Sort)>> {
        let mut out: Vec<(String, Sort)> = Vec::new();
        loop {
            let (name, pos) = self.ident("a variable name")?;
            if self.constructors.contains_key(&name) {
                return Err(SpecError::Name {
                    pos,
                    message: format!("variable '{name}' shadows a constructor"),
                });
            }
            if taken.iter().chain(&out).any(|(n, _)| *n == name) {
                return Err(SpecError::Name {
                    pos,
                    message: format!("variable '{name}' declared twice"),
                });
            }
            self.expect(Tok::Colon)?;
            let sort = self.sort_ref()?;
            out.push((name, sort));
            if !self.eat(Tok::Comma) {
                return Ok(out);
            }
        }
    }

    // tau | factor (| factor)*
    fn multi_action(&mut self, scopes: &[&[(String, Sort)]]) -> Parsed<MultiActionExpr> {
        if self.eat(Tok::Tau) {
            return Ok(MultiActionExpr::silent());
        }
        let mut factors = Vec::new();
        loop {
            let (label, pos) = self.ident("an action name")?;
            let signature = self
                .actions
                .get(&label)
                .cloned()
                .ok_or_else(|| SpecError::Name {
                    pos,
                    message: format!("action '{label}' is not declared"),
                })?;
            let mut args = Vec::new();
            if self.eat(Tok::LParen) && !self.eat(Tok::RParen) {
                loop {
                    let arg_pos = self.pos();
                    let arg = self.expr(scopes)?;
                    self.check_sort(&arg, None, arg_pos)?;
                    args.push((arg, arg_pos));
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
            if args.len() != signature.len() {
                return Err(SpecError::Sort {
                    pos,
                    message: format!(
                        "action '{label}' takes {} arguments, found {}",
                        signature.len(),
                        args.len()
                    ),
                });
            }
            for ((arg, arg_pos), expected) in args.iter().zip(&signature) {
                self.check_sort(arg, Some(expected), *arg_pos)?;
            }
            factors.push(ActionExpr::new(
                label,
                args.into_iter().map(|(a, _)| a).collect(),
            ));
            if !self.eat(Tok::Pipe) {
                return Ok(MultiActionExpr::from_factors(factors));
            }
        }
    }

    // [sum binders .] condition -> multiaction . Name(updates)
    fn summand(&mut self, proc_name: &str, params: &[(String, Sort)]) -> Parsed<Summand> {
        let sum_vars = if self.eat(Tok::Sum) {
            let binders = self.binders(params)?;
            self.expect(Tok::Dot)?;
            binders
        } else {
            Vec::new()
        };
        let scopes: [&[(String, Sort)]; 2] = [params, &sum_vars];

        let cond_pos = self.pos();
        let condition = self.expr(&scopes)?;
        self.check_sort(&condition, Some(&Sort::Bool), cond_pos)?;
        self.expect(Tok::Arrow)?;
        let action = self.multi_action(&scopes)?;
        self.expect(Tok::Dot)?;

        let (target, target_pos) = self.ident("the process name")?;
        if target != proc_name {
            return Err(SpecError::Name {
                pos: target_pos,
                message: format!("recursion must call '{proc_name}', found '{target}'"),
            });
        }
        self.expect(Tok::LParen)?;
        let mut updates = Vec::new();
        if !self.eat(Tok::RParen) {
            loop {
                let update_pos = self.pos();
                let update = self.expr(&scopes)?;
                let slot = updates.len();
                if let Some((_, sort)) = params.get(slot) {
                    self.check_sort(&update, Some(sort), update_pos)?;
                } else {
                    self.check_sort(&update, None, update_pos)?;
                }
                updates.push(update);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        if updates.len() != params.len() {
            return Err(SpecError::Sort {
                pos: target_pos,
                message: format!(
                    "'{proc_name}' takes {} arguments, found {}",
                    params.len(),
                    updates.len()
                ),
            });
        }
        Ok(Summand {
            sum_vars,
            condition,
            action,
            updates,
        })
    }

    // proc Name(params) = summand (+ summand)* ;
    fn proc_decl(&mut self) -> Parsed<Lpe> {
        self.expect(Tok::Proc)?;
        let (name, _) = self.ident("a process name")?;
        self.expect(Tok::LParen)?;
        let params = if *self.peek() == Tok::RParen {
            Vec::new()
        } else {
            self.binders(&[])?
        };
        self.expect(Tok::RParen)?;
        self.expect(Tok::Assign)?;
        let mut summands = vec![self.summand(&name, &params)?];
        while self.eat(Tok::Plus) {
            summands.push(self.summand(&name, &params)?);
        }
        self.expect(Tok::Semi)?;
        Ok(Lpe {
            name,
            params,
            actions: self.actions.clone(),
            summands,
        })
    }

    // A closed expression list evaluated to values, as in Name(0, false).
    fn closed_values(
        &mut self,
        params: &[(String, Sort)],
    ) -> Parsed<Vec<Value>> {
        self.expect(Tok::LParen)?;
        let mut values = Vec::new();
        if !self.eat(Tok::RParen) {
            loop {
                let pos = self.pos();
                let expr = self.expr(&[])?;
                if !expr.free_vars().is_empty() {
                    return Err(SpecError::Name {
                        pos,
                        message: "initial values must be closed expressions".into(),
                    });
                }
                let slot = values.len();
                if let Some((_, sort)) = params.get(slot) {
                    self.check_sort(&expr, Some(sort), pos)?;
                } else {
                    self.check_sort(&expr, None, pos)?;
                }
                let value = expr
                    .evaluate(&crate::data::Environment::new())
                    .map_err(|e| SpecError::Sort {
                        pos,
                        message: e.to_string(),
                    })?;
                values.push(value);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(values)
    }

    fn label_list(&mut self) -> Parsed<Vec<String>> {
        let mut labels = Vec::new();
        loop {
            let (label, pos) = self.ident("an action name")?;
            if !self.actions.contains_key(&label) {
                return Err(SpecError::Name {
                    pos,
                    message: format!("action '{label}' is not declared"),
                });
            }
            labels.push(label);
            if !self.eat(Tok::Pipe) {
                return Ok(labels);
            }
        }
    }

    fn composition_term(&mut self, process: &Arc<Lpe>) -> Parsed<CompositionExpr> {
        match self.peek().clone() {
            Tok::Allow => {
                self.next();
                self.expect(Tok::LParen)?;
                self.expect(Tok::LBrace)?;
                let mut allowed = BTreeSet::new();
                loop {
                    allowed.insert(label_multiset(self.label_list()?));
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                self.expect(Tok::Comma)?;
                let child = self.composition(process)?;
                self.expect(Tok::RParen)?;
                Ok(CompositionExpr::allow(allowed, child))
            }
            Tok::Comm => {
                self.next();
                self.expect(Tok::LParen)?;
                self.expect(Tok::LBrace)?;
                let mut rules = Vec::new();
                loop {
                    let lhs = self.label_list()?;
                    self.expect(Tok::Arrow)?;
                    let (rhs, pos) = self.ident("an action name")?;
                    if !self.actions.contains_key(&rhs) {
                        return Err(SpecError::Name {
                            pos,
                            message: format!("action '{rhs}' is not declared"),
                        });
                    }
                    rules.push(CommRule::new(lhs, rhs));
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                self.expect(Tok::Comma)?;
                let child = self.composition(process)?;
                self.expect(Tok::RParen)?;
                Ok(CompositionExpr::comm(rules, child))
            }
            Tok::Hide => {
                self.next();
                self.expect(Tok::LParen)?;
                self.expect(Tok::LBrace)?;
                let mut hidden = Vec::new();
                loop {
                    let (label, pos) = self.ident("an action name")?;
                    if !self.actions.contains_key(&label) {
                        return Err(SpecError::Name {
                            pos,
                            message: format!("action '{label}' is not declared"),
                        });
                    }
                    hidden.push(label);
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                self.expect(Tok::Comma)?;
                let child = self.composition(process)?;
                self.expect(Tok::RParen)?;
                Ok(CompositionExpr::hide(hidden, child))
            }
            Tok::LParen => {
                self.next();
                let inner = self.composition(process)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let pos = self.next().1;
                if name != process.name {
                    return Err(SpecError::Name {
                        pos,
                        message: format!(
                            "unknown process '{name}'; the declared process is '{}'",
                            process.name
                        ),
                    });
                }
                let values = self.closed_values(&process.params)?;
                let instance =
                    ProcessInstance::new(process.clone(), values).map_err(|e| SpecError::Sort {
                        pos,
                        message: e.to_string(),
                    })?;
                Ok(CompositionExpr::instance(instance))
            }
            other => self.error(format!("expected a composition expression, found {other}")),
        }
    }

    fn composition(&mut self, process: &Arc<Lpe>) -> Parsed<CompositionExpr> {
        let mut expr = self.composition_term(process)?;
        while self.eat(Tok::PipePipe) {
            expr = CompositionExpr::par(expr, self.composition_term(process)?);
        }
        Ok(expr)
    }
}

/// Parses a specification document.
pub fn parse_spec(text: &str) -> Result<SpecFile, SpecError> {
    let mut parser = Parser::new(text)?;
    let mut process: Option<Arc<Lpe>> = None;
    let mut init: Option<ProcessInstance> = None;
    let mut compositions = BTreeMap::new();

    loop {
        match parser.peek().clone() {
            Tok::Eof => break,
            Tok::Sort => parser.sort_decl()?,
            Tok::Act => parser.act_decl()?,
            Tok::Proc => {
                if process.is_some() {
                    return parser.error("a specification declares exactly one process");
                }
                process = Some(Arc::new(parser.proc_decl()?));
            }
            Tok::Init => {
                let pos = parser.pos();
                parser.next();
                let process = process.as_ref().ok_or_else(|| SpecError::Name {
                    pos,
                    message: "init before the process declaration".into(),
                })?;
                if init.is_some() {
                    return parser.error("a specification declares exactly one init");
                }
                let (name, name_pos) = parser.ident("the process name")?;
                if name != process.name {
                    return Err(SpecError::Name {
                        pos: name_pos,
                        message: format!("init must instantiate '{}'", process.name),
                    });
                }
                let values = parser.closed_values(&process.params)?;
                parser.expect(Tok::Semi)?;
                init = Some(ProcessInstance::new(process.clone(), values).map_err(|e| {
                    SpecError::Sort {
                        pos: name_pos,
                        message: e.to_string(),
                    }
                })?);
            }
            Tok::Composition => {
                let pos = parser.pos();
                parser.next();
                let process = process.as_ref().ok_or_else(|| SpecError::Name {
                    pos,
                    message: "composition before the process declaration".into(),
                })?;
                let (name, _) = parser.ident("a composition name")?;
                parser.expect(Tok::Assign)?;
                let expr = parser.composition(process)?;
                parser.expect(Tok::Semi)?;
                compositions.insert(name, expr);
            }
            other => {
                return parser.error(format!(
                    "expected a declaration (sort/act/proc/init/composition), found {other}"
                ))
            }
        }
    }

    let process = process.ok_or_else(|| SpecError::Validation {
        message: "missing process declaration".into(),
    })?;
    let init = init.ok_or_else(|| SpecError::Validation {
        message: "missing init declaration".into(),
    })?;

    let report = validate_lpe(&process);
    if !report.is_valid() {
        return Err(SpecError::Validation {
            message: report.to_string(),
        });
    }

    Ok(SpecFile {
        sorts: parser.sorts,
        process,
        init,
        compositions,
    })
}

/// Parses an expression over the parameters of the specification's process,
/// as used for invariants supplied on the command line or in files.
pub fn parse_expression(text: &str, spec: &SpecFile) -> Result<Expression, SpecError> {
    let mut parser = Parser::new(text)?;
    parser.sorts = spec.sorts.clone();
    parser.actions = spec.process.actions.clone();
    for (name, declared) in &spec.sorts {
        let _ = name;
        for (i, ctor) in declared.constructors.iter().enumerate() {
            parser
                .constructors
                .insert(ctor.clone(), (declared.clone(), i));
        }
    }
    let scopes: [&[(String, Sort)]; 1] = [&spec.process.params];
    let expr = parser.expr(&scopes)?;
    parser.expect(Tok::Eof)?;
    Ok(expr)
}

/// Parses a parameter partition document: two lines `V = names` and
/// `W = names`, comma-separated, possibly empty, with `%` comments.
pub fn parse_partition(text: &str) -> Result<(Vec<String>, Vec<String>), SpecError> {
    let mut v: Option<Vec<String>> = None;
    let mut w: Option<Vec<String>> = None;
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let pos = Pos {
            line: index + 1,
            col: 1,
        };
        let (key, rest) = line.split_once('=').ok_or_else(|| SpecError::Parse {
            pos,
            message: "expected 'V = names' or 'W = names'".into(),
        })?;
        let names: Vec<String> = rest
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let slot = match key.trim() {
            "V" => &mut v,
            "W" => &mut w,
            other => {
                return Err(SpecError::Parse {
                    pos,
                    message: format!("expected key 'V' or 'W', found '{other}'"),
                })
            }
        };
        if slot.is_some() {
            return Err(SpecError::Parse {
                pos,
                message: format!("key '{}' given twice", key.trim()),
            });
        }
        *slot = Some(names);
    }
    match (v, w) {
        (Some(v), Some(w)) => Ok((v, w)),
        _ => Err(SpecError::Validation {
            message: "partition needs both a V and a W line".into(),
        }),
    }
}
