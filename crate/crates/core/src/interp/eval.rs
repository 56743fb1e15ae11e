//! Big-step tree-walking evaluator.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use crate::lang::vars::bound_vars;
use crate::lang::{BinOp, Expr, Ident, Program, Stmt, StmtId, StmtKind, UnOp};

use super::manifest::{Case, Entry};
use super::value::{self, norm_index, slice_bounds, Key, Value};
use super::{ErrorKind, Outcome, Status};

const MAX_DEPTH: usize = 100;

/// Variables to observe at each statement.
pub type ProbeSpec = BTreeMap<StmtId, BTreeSet<Ident>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProbePoint {
    /// Control is about to execute the statement. For loops this fires at
    /// every evaluation of the loop head.
    Before,
    /// The statement completed normally.
    After,
}

#[derive(Debug, Clone)]
pub struct ProbeRecord {
    pub stmt: StmtId,
    pub point: ProbePoint,
    /// Value of each probed variable; `None` when unbound.
    pub values: Vec<(Ident, Option<Value>)>,
}

enum Stop {
    Error(ErrorKind),
    Fuel,
}

impl From<ErrorKind> for Stop {
    fn from(k: ErrorKind) -> Stop {
        Stop::Error(k)
    }
}

enum Flow {
    Next,
    Return(Value),
}

type R<T> = Result<T, Stop>;

struct Frame {
    vars: HashMap<Ident, Value>,
    locals: Rc<BTreeSet<Ident>>,
}

struct FunInfo<'p> {
    params: &'p [Ident],
    body: &'p [Stmt],
    locals: Rc<BTreeSet<Ident>>,
}

struct Machine<'p> {
    functions: HashMap<&'p str, FunInfo<'p>>,
    defined: BTreeSet<Ident>,
    globals: HashMap<Ident, Value>,
    frames: Vec<Frame>,
    tape: Vec<String>,
    tape_pos: usize,
    fuel: u64,
    stdout: Vec<String>,
    probes: Option<&'p ProbeSpec>,
    log: Vec<ProbeRecord>,
}

impl<'p> Machine<'p> {
    fn new(
        p: &'p Program,
        tape: Vec<String>,
        fuel: u64,
        probes: Option<&'p ProbeSpec>,
    ) -> Machine<'p> {
        let mut functions = HashMap::new();
        p.walk(&mut |s| {
            if let StmtKind::FunDef { name, params, body } = &s.kind {
                let mut locals = bound_vars(body);
                locals.extend(params.iter().cloned());
                functions.insert(
                    name.as_str(),
                    FunInfo {
                        params,
                        body,
                        locals: Rc::new(locals),
                    },
                );
            }
        });
        Machine {
            functions,
            defined: BTreeSet::new(),
            globals: HashMap::new(),
            frames: Vec::new(),
            tape,
            tape_pos: 0,
            fuel,
            stdout: Vec::new(),
            probes,
            log: Vec::new(),
        }
    }

    fn tick(&mut self) -> R<()> {
        if self.fuel == 0 {
            return Err(Stop::Fuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        if let Some(f) = self.frames.last() {
            if f.locals.contains(name) {
                return f.vars.get(name);
            }
        }
        self.globals.get(name)
    }

    fn get(&self, name: &str) -> R<Value> {
        self.lookup(name)
            .cloned()
            .ok_or(Stop::Error(ErrorKind::UnboundVariable))
    }

    fn set(&mut self, name: &str, v: Value) {
        match self.frames.last_mut() {
            Some(f) => {
                f.vars.insert(name.to_string(), v);
            }
            None => {
                self.globals.insert(name.to_string(), v);
            }
        }
    }

    fn probe(&mut self, id: StmtId, point: ProbePoint) {
        let Some(spec) = self.probes else { return };
        let Some(vars) = spec.get(&id) else { return };
        let values = vars
            .iter()
            .map(|v| (v.clone(), self.lookup(v).cloned()))
            .collect();
        self.log.push(ProbeRecord {
            stmt: id,
            point,
            values,
        });
    }

    fn exec_block(&mut self, block: &'p [Stmt]) -> R<Flow> {
        for s in block {
            if let Flow::Return(v) = self.exec(s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn exec(&mut self, s: &'p Stmt) -> R<Flow> {
        self.tick()?;
        let is_loop = matches!(s.kind, StmtKind::While { .. } | StmtKind::For { .. });
        if !is_loop {
            self.probe(s.id, ProbePoint::Before);
        }
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let v = self.eval(value)?;
                self.set(target, v);
            }
            StmtKind::SubscriptAssign {
                target,
                index,
                value,
            } => {
                let v = self.eval(value)?;
                let container = self.get(target)?;
                let idx = self.eval(index)?;
                match &container {
                    Value::List(l) => {
                        let mut l = l.borrow_mut();
                        let i = norm_index(&idx, l.len())?;
                        l[i] = v;
                    }
                    Value::Dict(d) => {
                        d.borrow_mut().insert(Key::from_value(&idx)?, v);
                    }
                    _ => return Err(ErrorKind::TypeError.into()),
                }
            }
            StmtKind::If {
                guard,
                then_body,
                else_body,
            } => {
                let g = self.eval(guard)?.truthy();
                let flow = self.exec_block(if g { then_body } else { else_body })?;
                if let Flow::Return(_) = flow {
                    return Ok(flow);
                }
            }
            StmtKind::While { guard, body } => loop {
                self.probe(s.id, ProbePoint::Before);
                self.tick()?;
                if !self.eval(guard)?.truthy() {
                    break;
                }
                if let Flow::Return(v) = self.exec_block(body)? {
                    return Ok(Flow::Return(v));
                }
            },
            StmtKind::For { var, iter, body } => {
                self.probe(s.id, ProbePoint::Before);
                if let Flow::Return(v) = self.exec_for(s.id, var, iter, body)? {
                    return Ok(Flow::Return(v));
                }
            }
            StmtKind::FunDef { name, .. } => {
                self.defined.insert(name.clone());
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::ExprStmt(e) => {
                self.eval(e)?;
            }
            StmtKind::Pass => {}
        }
        self.probe(s.id, ProbePoint::After);
        Ok(Flow::Next)
    }

    fn exec_for(&mut self, id: StmtId, var: &str, iter: &'p Expr, body: &'p [Stmt]) -> R<Flow> {
        // `range` is iterated lazily; everything else through its value.
        if let Expr::Call { callee, args } = iter {
            if callee == "range" && !self.defined.contains("range") {
                let vals = self.eval_args(args)?;
                let (start, stop, step) = range_args(&vals)?;
                let mut i = start;
                let mut first = true;
                while (step > 0 && i < stop) || (step < 0 && i > stop) {
                    if !first {
                        self.probe(id, ProbePoint::Before);
                    }
                    first = false;
                    self.tick()?;
                    self.set(var, Value::Int(i));
                    if let Flow::Return(v) = self.exec_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                    i = match i.checked_add(step) {
                        Some(n) => n,
                        None => break,
                    };
                }
                return Ok(Flow::Next);
            }
        }
        let it = self.eval(iter)?;
        let items: Box<dyn Fn(usize) -> Option<Value>> = match &it {
            Value::List(l) => {
                let l = l.clone();
                Box::new(move |i| l.borrow().get(i).cloned())
            }
            Value::Str(s) => {
                let chars: Vec<Value> = s.chars().map(|c| Value::str(&c.to_string())).collect();
                Box::new(move |i| chars.get(i).cloned())
            }
            Value::Dict(d) => {
                let keys: Vec<Value> = d.borrow().keys().map(Key::to_value).collect();
                Box::new(move |i| keys.get(i).cloned())
            }
            _ => return Err(ErrorKind::TypeError.into()),
        };
        let mut i = 0;
        while let Some(item) = items(i) {
            if i > 0 {
                self.probe(id, ProbePoint::Before);
            }
            self.tick()?;
            self.set(var, item);
            if let Flow::Return(v) = self.exec_block(body)? {
                return Ok(Flow::Return(v));
            }
            i += 1;
        }
        Ok(Flow::Next)
    }

    fn eval_args(&mut self, args: &'p [Expr]) -> R<Vec<Value>> {
        args.iter().map(|a| self.eval(a)).collect()
    }

    fn eval(&mut self, e: &'p Expr) -> R<Value> {
        self.tick()?;
        match e {
            Expr::Const(l) => Ok(Value::from(l)),
            Expr::Var(v) => self.get(v),
            Expr::BinOp {
                op: BinOp::And,
                lhs,
                rhs,
            } => {
                let l = self.eval(lhs)?;
                if !l.truthy() {
                    return Ok(l);
                }
                self.eval(rhs)
            }
            Expr::BinOp {
                op: BinOp::Or,
                lhs,
                rhs,
            } => {
                let l = self.eval(lhs)?;
                if l.truthy() {
                    return Ok(l);
                }
                self.eval(rhs)
            }
            Expr::BinOp { op, lhs, rhs } => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                Ok(binop(*op, &l, &r)?)
            }
            Expr::UnOp {
                op: UnOp::Neg,
                operand,
            } => {
                let v = self.eval(operand)?;
                Ok(value::neg(&v)?)
            }
            Expr::UnOp {
                op: UnOp::Not,
                operand,
            } => Ok(Value::Bool(!self.eval(operand)?.truthy())),
            Expr::Call { callee, args } => {
                let vals = self.eval_args(args)?;
                if self.defined.contains(callee.as_str()) {
                    self.call_user(callee, vals)
                } else {
                    self.call_builtin(callee, vals)
                }
            }
            Expr::Subscript { base, index } => {
                let b = self.eval(base)?;
                let i = self.eval(index)?;
                Ok(subscript(&b, &i)?)
            }
            Expr::Slice { base, lower, upper } => {
                let b = self.eval(base)?;
                let lo = match lower {
                    Some(e) => Some(self.eval(e)?.as_int().ok_or(ErrorKind::TypeError)?),
                    None => None,
                };
                let hi = match upper {
                    Some(e) => Some(self.eval(e)?.as_int().ok_or(ErrorKind::TypeError)?),
                    None => None,
                };
                match &b {
                    Value::List(l) => {
                        let l = l.borrow();
                        let (a, z) = slice_bounds(lo, hi, l.len());
                        Ok(Value::list(l[a..z].to_vec()))
                    }
                    Value::Str(s) => {
                        let chars: Vec<char> = s.chars().collect();
                        let (a, z) = slice_bounds(lo, hi, chars.len());
                        Ok(Value::str(&chars[a..z].iter().collect::<String>()))
                    }
                    _ => Err(ErrorKind::TypeError.into()),
                }
            }
            Expr::List(items) => Ok(Value::list(self.eval_args(items)?)),
            Expr::MethodCall { base, method, args } => {
                let b = self.eval(base)?;
                let vals = self.eval_args(args)?;
                Ok(call_method(&b, method, vals)?)
            }
        }
    }

    fn call_user(&mut self, name: &str, args: Vec<Value>) -> R<Value> {
        let info = self
            .functions
            .get(name)
            .ok_or(Stop::Error(ErrorKind::UnboundVariable))?;
        if info.params.len() != args.len() {
            return Err(ErrorKind::TypeError.into());
        }
        if self.frames.len() >= MAX_DEPTH {
            return Err(ErrorKind::RecursionDepth.into());
        }
        let body = info.body;
        let vars = info.params.iter().cloned().zip(args).collect();
        self.frames.push(Frame {
            vars,
            locals: info.locals.clone(),
        });
        // Grows the host stack on demand, so deep interpreted recursion
        // also runs on small worker stacks.
        let res = stacker::maybe_grow(256 * 1024, 4 * 1024 * 1024, || self.exec_block(body));
        self.frames.pop();
        match res? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Ok(Value::None),
        }
    }

    fn call_builtin(&mut self, name: &str, args: Vec<Value>) -> R<Value> {
        match name {
            "print" => {
                let line = args
                    .iter()
                    .map(Value::try_str)
                    .collect::<Result<Vec<_>, _>>()?;
                self.stdout.push(line.join(" "));
                Ok(Value::None)
            }
            "input" => {
                if args.len() > 1 {
                    return Err(ErrorKind::TypeError.into());
                }
                let v = self
                    .tape
                    .get(self.tape_pos)
                    .cloned()
                    .ok_or(Stop::Error(ErrorKind::TapeExhausted))?;
                self.tape_pos += 1;
                Ok(Value::str(&v))
            }
            _ => Ok(pure_builtin(name, &args)?),
        }
    }
}

fn binop(op: BinOp, l: &Value, r: &Value) -> Result<Value, ErrorKind> {
    match op {
        BinOp::Add => value::add(l, r),
        BinOp::Sub => value::sub(l, r),
        BinOp::Mul => value::mul(l, r),
        BinOp::Div => value::truediv(l, r),
        BinOp::FloorDiv => value::floordiv(l, r),
        BinOp::Mod => value::modulo(l, r),
        BinOp::Pow => value::power(l, r),
        BinOp::And | BinOp::Or => unreachable!("short-circuit operators are evaluated lazily"),
        cmp => value::compare(cmp, l, r).map(Value::Bool),
    }
}

fn subscript(b: &Value, i: &Value) -> Result<Value, ErrorKind> {
    match b {
        Value::List(l) => {
            let l = l.borrow();
            Ok(l[norm_index(i, l.len())?].clone())
        }
        Value::Str(s) => {
            let chars: Vec<char> = s.chars().collect();
            Ok(Value::str(&chars[norm_index(i, chars.len())?].to_string()))
        }
        Value::Dict(d) => d
            .borrow()
            .get(&Key::from_value(i)?)
            .cloned()
            .ok_or(ErrorKind::KeyError),
        _ => Err(ErrorKind::TypeError),
    }
}

fn range_args(vals: &[Value]) -> Result<(i64, i64, i64), ErrorKind> {
    let ints: Vec<i64> = vals
        .iter()
        .map(|v| v.as_int().ok_or(ErrorKind::TypeError))
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = match ints.as_slice() {
        [stop] => (0, *stop, 1),
        [start, stop] => (*start, *stop, 1),
        [start, stop, step] => (*start, *stop, *step),
        _ => return Err(ErrorKind::TypeError),
    };
    if step == 0 {
        return Err(ErrorKind::ValueError);
    }
    Ok((start, stop, step))
}

/// Length of `range(args)`, used by folding and loop-emptiness tests.
pub fn range_len(vals: &[Value]) -> Result<i64, ErrorKind> {
    let (start, stop, step) = range_args(vals)?;
    let (start, stop, step) = (start as i128, stop as i128, step as i128);
    let n = if step > 0 {
        (stop - start + step - 1).div_euclid(step)
    } else {
        (start - stop - step - 1).div_euclid(-step)
    };
    Ok(n.max(0).min(i64::MAX as i128) as i64)
}

fn iter_items(v: &Value) -> Result<Vec<Value>, ErrorKind> {
    match v {
        Value::List(l) => Ok(l.borrow().clone()),
        Value::Str(s) => Ok(s.chars().map(|c| Value::str(&c.to_string())).collect()),
        Value::Dict(d) => Ok(d.borrow().keys().map(Key::to_value).collect()),
        _ => Err(ErrorKind::TypeError),
    }
}

fn parse_int(s: &str) -> Result<i64, ErrorKind> {
    let t = s.trim();
    let (neg, digits) = match t.strip_prefix('-') {
        Some(d) => (true, d),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    if digits.is_empty()
        || digits.starts_with('_')
        || digits.ends_with('_')
        || digits.contains("__")
        || !digits.chars().all(|c| c.is_ascii_digit() || c == '_')
    {
        return Err(ErrorKind::ValueError);
    }
    let clean: String = digits.chars().filter(|c| *c != '_').collect();
    let v: i64 = clean.parse().map_err(|_| ErrorKind::Overflow)?;
    Ok(if neg { -v } else { v })
}

fn extremum(args: &[Value], want: std::cmp::Ordering) -> Result<Value, ErrorKind> {
    let items = match args {
        [single] => iter_items(single)?,
        [] => return Err(ErrorKind::TypeError),
        many => many.to_vec(),
    };
    let mut it = items.into_iter();
    let mut best = it.next().ok_or(ErrorKind::ValueError)?;
    for v in it {
        if v.py_cmp(&best)? == want {
            best = v;
        }
    }
    Ok(best)
}

/// Builtins without side effects. These are also the ones constant
/// folding may evaluate.
pub fn pure_builtin(name: &str, args: &[Value]) -> Result<Value, ErrorKind> {
    use std::cmp::Ordering;
    match (name, args) {
        ("int", []) => Ok(Value::Int(0)),
        ("int", [v]) => match v {
            Value::Int(i) => Ok(Value::Int(*i)),
            Value::Bool(b) => Ok(Value::Int(*b as i64)),
            Value::Float(f) => {
                if f.is_nan() {
                    Err(ErrorKind::ValueError)
                } else if f.abs() >= 9.2e18 {
                    Err(ErrorKind::Overflow)
                } else {
                    Ok(Value::Int(f.trunc() as i64))
                }
            }
            Value::Str(s) => parse_int(s).map(Value::Int),
            _ => Err(ErrorKind::TypeError),
        },
        ("float", []) => Ok(Value::Float(0.0)),
        ("float", [v]) => match v {
            Value::Str(s) => {
                let t = s.trim();
                let ok = !t.is_empty()
                    && t.chars()
                        .all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c));
                if !ok {
                    return Err(ErrorKind::ValueError);
                }
                t.parse::<f64>()
                    .map(Value::Float)
                    .map_err(|_| ErrorKind::ValueError)
            }
            other => other.as_f64().map(Value::Float).ok_or(ErrorKind::TypeError),
        },
        ("str", []) => Ok(Value::str("")),
        ("str", [v]) => Ok(Value::str(&v.try_str()?)),
        ("bool", []) => Ok(Value::Bool(false)),
        ("bool", [v]) => Ok(Value::Bool(v.truthy())),
        ("len", [v]) => match v {
            Value::Str(s) => Ok(Value::Int(s.chars().count() as i64)),
            Value::List(l) => Ok(Value::Int(l.borrow().len() as i64)),
            Value::Dict(d) => Ok(Value::Int(d.borrow().len() as i64)),
            _ => Err(ErrorKind::TypeError),
        },
        ("abs", [v]) => match v {
            Value::Int(i) => i.checked_abs().map(Value::Int).ok_or(ErrorKind::Overflow),
            Value::Bool(b) => Ok(Value::Int(*b as i64)),
            Value::Float(f) => Ok(Value::Float(f.abs())),
            _ => Err(ErrorKind::TypeError),
        },
        ("min", _) => extremum(args, Ordering::Less),
        ("max", _) => extremum(args, Ordering::Greater),
        ("range", _) => {
            let (start, _, step) = range_args(args)?;
            let n = range_len(args)?;
            if n > 10_000_000 {
                return Err(ErrorKind::Overflow);
            }
            Ok(Value::list(
                (0..n).map(|k| Value::Int(start + k * step)).collect(),
            ))
        }
        ("list", []) => Ok(Value::list(Vec::new())),
        ("list", [v]) => iter_items(v).map(Value::list),
        ("dict", []) => Ok(Value::dict()),
        ("dict", [Value::Dict(d)]) => Ok(Value::Dict(Rc::new(std::cell::RefCell::new(
            d.borrow().clone(),
        )))),
        ("sum", [v]) => {
            let mut acc = Value::Int(0);
            for x in iter_items(v)? {
                acc = value::add(&acc, &x)?;
            }
            Ok(acc)
        }
        ("print" | "input", _) => Err(ErrorKind::TypeError),
        (_, _) if is_builtin(name) => Err(ErrorKind::TypeError),
        _ => Err(ErrorKind::UnboundVariable),
    }
}

pub const BUILTINS: &[&str] = &[
    "print", "input", "int", "float", "str", "bool", "len", "abs", "min", "max", "range", "list",
    "dict", "sum",
];

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

fn call_method(b: &Value, method: &str, args: Vec<Value>) -> Result<Value, ErrorKind> {
    match b {
        Value::List(l) => {
            // Comparing elements may read this very list again, so these
            // methods work on a snapshot and only borrow mutably to store.
            match (method, args.as_slice()) {
                ("remove", [x]) => {
                    let pos = position(&l.borrow().clone(), x)?.ok_or(ErrorKind::ValueError)?;
                    l.borrow_mut().remove(pos);
                    return Ok(Value::None);
                }
                ("index", [x]) => {
                    return position(&l.borrow().clone(), x)?
                        .map(|p| Value::Int(p as i64))
                        .ok_or(ErrorKind::ValueError);
                }
                ("count", [x]) => {
                    let mut n = 0;
                    for y in l.borrow().clone().iter() {
                        n += y.py_eq(x)? as i64;
                    }
                    return Ok(Value::Int(n));
                }
                ("sort", []) => {
                    let mut err = None;
                    let mut v = l.borrow().clone();
                    v.sort_by(|a, b| {
                        a.py_cmp(b).unwrap_or_else(|e| {
                            err = Some(e);
                            std::cmp::Ordering::Equal
                        })
                    });
                    if let Some(e) = err {
                        return Err(e);
                    }
                    *l.borrow_mut() = v;
                    return Ok(Value::None);
                }
                _ => {}
            }
            let mut items = l.borrow_mut();
            match (method, args.as_slice()) {
                ("append", [x]) => {
                    items.push(x.clone());
                    Ok(Value::None)
                }
                ("pop", []) => items.pop().ok_or(ErrorKind::IndexOutOfRange),
                ("pop", [i]) => {
                    let i = norm_index(i, items.len())?;
                    Ok(items.remove(i))
                }
                ("insert", [i, x]) => {
                    let len = items.len() as i64;
                    let i = i.as_int().ok_or(ErrorKind::TypeError)?;
                    let at = if i < 0 { (i + len).max(0) } else { i.min(len) };
                    items.insert(at as usize, x.clone());
                    Ok(Value::None)
                }
                ("extend", [x]) => {
                    let more = match x {
                        Value::List(m) if Rc::ptr_eq(m, l) => items.clone(),
                        other => iter_items(other)?,
                    };
                    items.extend(more);
                    Ok(Value::None)
                }
                ("copy", []) => Ok(Value::list(items.clone())),
                ("clear", []) => {
                    items.clear();
                    Ok(Value::None)
                }
                ("reverse", []) => {
                    items.reverse();
                    Ok(Value::None)
                }
                _ => Err(ErrorKind::TypeError),
            }
        }
        Value::Dict(d) => match (method, args.as_slice()) {
            ("get", [k]) => Ok(d
                .borrow()
                .get(&Key::from_value(k)?)
                .cloned()
                .unwrap_or(Value::None)),
            ("get", [k, default]) => Ok(d
                .borrow()
                .get(&Key::from_value(k)?)
                .cloned()
                .unwrap_or_else(|| default.clone())),
            ("update", [Value::Dict(other)]) => {
                let entries: Vec<(Key, Value)> = other
                    .borrow()
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                d.borrow_mut().extend(entries);
                Ok(Value::None)
            }
            ("copy", []) => Ok(Value::Dict(Rc::new(std::cell::RefCell::new(
                d.borrow().clone(),
            )))),
            ("pop", [k]) => d
                .borrow_mut()
                .shift_remove(&Key::from_value(k)?)
                .ok_or(ErrorKind::KeyError),
            ("clear", []) => {
                d.borrow_mut().clear();
                Ok(Value::None)
            }
            _ => Err(ErrorKind::TypeError),
        },
        _ => Err(ErrorKind::TypeError),
    }
}

/// Evaluates a closed expression (no variables, no user calls, no I/O).
/// Used by constant folding; returns `None` if the expression needs state.
pub fn eval_closed(e: &Expr) -> Option<Result<Value, ErrorKind>> {
    let needs_state = e.any(&mut |x| match x {
        Expr::Var(_) => true,
        Expr::Call { callee, .. } => callee == "print" || callee == "input" || !is_builtin(callee),
        _ => false,
    });
    if needs_state {
        return None;
    }
    let p = Program::default();
    let mut m = Machine::new(&p, Vec::new(), 100_000, None);
    Some(match m.eval(e) {
        Ok(v) => Ok(v),
        Err(Stop::Error(k)) => Err(k),
        Err(Stop::Fuel) => Err(ErrorKind::Overflow),
    })
}

fn position(items: &[Value], x: &Value) -> Result<Option<usize>, ErrorKind> {
    for (i, y) in items.iter().enumerate() {
        if y.py_eq(x)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

fn finish(m: &mut Machine<'_>, res: R<Option<Value>>) -> Outcome {
    match res {
        Ok(result) => Outcome {
            stdout: std::mem::take(&mut m.stdout),
            result: result.map(|v| v.repr()),
            status: Status::Normal,
        },
        Err(Stop::Error(k)) => Outcome {
            stdout: Vec::new(),
            result: None,
            status: Status::RuntimeError(k),
        },
        Err(Stop::Fuel) => Outcome {
            stdout: std::mem::take(&mut m.stdout),
            result: None,
            status: Status::FuelExhausted,
        },
    }
}

fn drive<'p>(m: &mut Machine<'p>, p: &'p Program, entry: &Entry, case: &Case) -> R<Option<Value>> {
    m.exec_block(&p.body)?;
    match (entry, case) {
        (Entry::Script, _) => Ok(None),
        (Entry::Function(name), case) => {
            if !m.defined.contains(name.as_str()) {
                return Err(ErrorKind::UnboundVariable.into());
            }
            // A list of strings deserializes as a tape; as arguments it is
            // just string arguments.
            let vals = match case {
                Case::Args(args) => args.iter().map(Value::from_json).collect(),
                Case::Tape(t) => t.iter().map(|s| Value::str(s)).collect(),
            };
            m.call_user(name, vals).map(Some)
        }
    }
}

fn tape_of(entry: &Entry, case: &Case) -> Vec<String> {
    match (entry, case) {
        (Entry::Script, Case::Tape(t)) => t.clone(),
        _ => Vec::new(),
    }
}

/// Runs `p` on one case with the given step budget.
pub fn run(p: &Program, entry: &Entry, case: &Case, fuel: u64) -> Outcome {
    let mut m = Machine::new(p, tape_of(entry, case), fuel, None);
    let res = drive(&mut m, p, entry, case);
    finish(&mut m, res)
}

/// Like [`run`], additionally logging the probed variables each time
/// control passes a probed statement.
pub fn instrumented_run(
    p: &Program,
    entry: &Entry,
    case: &Case,
    fuel: u64,
    probes: &ProbeSpec,
) -> (Outcome, Vec<ProbeRecord>) {
    let mut m = Machine::new(p, tape_of(entry, case), fuel, Some(probes));
    let res = drive(&mut m, p, entry, case);
    let out = finish(&mut m, res);
    (out, std::mem::take(&mut m.log))
}
