//! Runtime values with Python semantics for the operators the subset uses.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::rc::Rc;

use indexmap::IndexMap;

use crate::lang::printer::{float_repr, str_repr};
use crate::lang::Literal;

use super::ErrorKind;

/// How deeply containers may nest before printing or comparing them fails.
pub const MAX_NESTING: usize = 200;

pub type ListRef = Rc<RefCell<Vec<Value>>>;
pub type DictRef = Rc<RefCell<IndexMap<Key, Value>>>;

#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(Rc<str>),
    List(ListRef),
    Dict(DictRef),
    None,
}

/// Hashable dictionary keys. Booleans and integral floats collapse onto
/// integers, as they do in Python.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Key {
    Int(i64),
    Str(Rc<str>),
}

impl Key {
    pub fn from_value(v: &Value) -> Result<Key, ErrorKind> {
        match v {
            Value::Int(i) => Ok(Key::Int(*i)),
            Value::Bool(b) => Ok(Key::Int(*b as i64)),
            Value::Float(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(Key::Int(*f as i64)),
            Value::Str(s) => Ok(Key::Str(s.clone())),
            _ => Err(ErrorKind::TypeError),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Key::Int(i) => Value::Int(*i),
            Key::Str(s) => Value::Str(s.clone()),
        }
    }
}

/// Nested containers are released with an explicit worklist, so dropping a
/// list nested a million levels deep does not recurse on the host stack.
impl Drop for Value {
    fn drop(&mut self) {
        let mut pending = Vec::new();
        release(self, &mut pending);
        while let Some(mut v) = pending.pop() {
            release(&mut v, &mut pending);
        }
    }
}

/// Moves the items of a container that is about to die onto `pending`.
fn release(v: &mut Value, pending: &mut Vec<Value>) {
    match v {
        Value::List(l) if Rc::strong_count(l) == 1 => {
            if let Ok(mut items) = l.try_borrow_mut() {
                pending.append(&mut items);
            }
        }
        Value::Dict(d) if Rc::strong_count(d) == 1 => {
            if let Ok(mut items) = d.try_borrow_mut() {
                pending.extend(items.drain(..).map(|(_, v)| v));
            }
        }
        _ => {}
    }
}

impl From<&Literal> for Value {
    fn from(l: &Literal) -> Value {
        match l {
            Literal::Int(v) => Value::Int(*v),
            Literal::Float(v) => Value::Float(*v),
            Literal::Bool(v) => Value::Bool(*v),
            Literal::Str(s) => Value::Str(s.as_str().into()),
        }
    }
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(s.into())
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    pub fn dict() -> Value {
        Value::Dict(Rc::new(RefCell::new(IndexMap::new())))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Bool(_) => "bool",
            Value::Str(_) => "str",
            Value::List(_) => "list",
            Value::Dict(_) => "dict",
            Value::None => "NoneType",
        }
    }

    /// Scalar values convert back to literals; containers and `None` do not.
    pub fn to_literal(&self) -> Option<Literal> {
        match self {
            Value::Int(v) => Some(Literal::Int(*v)),
            Value::Float(v) => Some(Literal::Float(*v)),
            Value::Bool(v) => Some(Literal::Bool(*v)),
            Value::Str(s) => Some(Literal::Str(s.to_string())),
            _ => None,
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Int(v) => *v != 0,
            Value::Float(v) => *v != 0.0,
            Value::Bool(v) => *v,
            Value::Str(s) => !s.is_empty(),
            Value::List(l) => !l.borrow().is_empty(),
            Value::Dict(d) => !d.borrow().is_empty(),
            Value::None => false,
        }
    }

    /// Printable form; containers nested past the depth limit are elided.
    pub fn repr(&self) -> String {
        self.try_repr().unwrap_or_else(|_| "...".into())
    }

    /// `str(v)`: strings print raw, everything else as `repr`.
    pub fn to_str(&self) -> String {
        match self {
            Value::Str(s) => s.to_string(),
            other => other.repr(),
        }
    }

    /// Like `repr`, but fails on nesting deeper than [`MAX_NESTING`], as
    /// Python does. A container reached again inside itself prints as
    /// `[...]` or `{...}`.
    pub fn try_repr(&self) -> Result<String, ErrorKind> {
        let mut out = String::new();
        self.write_repr(&mut out, &mut Vec::new())?;
        Ok(out)
    }

    pub fn try_str(&self) -> Result<String, ErrorKind> {
        match self {
            Value::Str(s) => Ok(s.to_string()),
            other => other.try_repr(),
        }
    }

    fn write_repr(&self, out: &mut String, open: &mut Vec<*const ()>) -> Result<(), ErrorKind> {
        match self {
            Value::Int(v) => out.push_str(&v.to_string()),
            Value::Float(v) => out.push_str(&float_repr(*v)),
            Value::Bool(true) => out.push_str("True"),
            Value::Bool(false) => out.push_str("False"),
            Value::Str(s) => out.push_str(&str_repr(s)),
            Value::None => out.push_str("None"),
            Value::List(l) => {
                let id = Rc::as_ptr(l) as *const ();
                if open.contains(&id) {
                    out.push_str("[...]");
                    return Ok(());
                }
                if open.len() >= MAX_NESTING {
                    return Err(ErrorKind::RecursionDepth);
                }
                open.push(id);
                out.push('[');
                for (i, item) in l.borrow().iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write_repr(out, open)?;
                }
                out.push(']');
                open.pop();
            }
            Value::Dict(d) => {
                let id = Rc::as_ptr(d) as *const ();
                if open.contains(&id) {
                    out.push_str("{...}");
                    return Ok(());
                }
                if open.len() >= MAX_NESTING {
                    return Err(ErrorKind::RecursionDepth);
                }
                open.push(id);
                out.push('{');
                for (i, (k, v)) in d.borrow().iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    k.to_value().write_repr(out, open)?;
                    out.push_str(": ");
                    v.write_repr(out, open)?;
                }
                out.push('}');
                open.pop();
            }
        }
        Ok(())
    }

    /// Numeric view for int/bool/float.
    fn num(&self) -> Option<Num> {
        match self {
            Value::Int(v) => Some(Num::I(*v)),
            Value::Bool(b) => Some(Num::I(*b as i64)),
            Value::Float(f) => Some(Num::F(*f)),
            _ => None,
        }
    }

    /// Integer view for int/bool (used for indices and repetition counts).
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Bool(b) => Some(*b as i64),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self.num()? {
            Num::I(i) => Some(i as f64),
            Num::F(f) => Some(f),
        }
    }

    /// Python `==`. Distinct self-containing structures fail with a
    /// recursion error rather than looping.
    pub fn py_eq(&self, other: &Value) -> Result<bool, ErrorKind> {
        self.eq_at(other, 0)
    }

    fn eq_at(&self, other: &Value, depth: usize) -> Result<bool, ErrorKind> {
        if let (Some(a), Some(b)) = (self.num(), other.num()) {
            return Ok(num_cmp(a, b) == Some(Ordering::Equal));
        }
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => Ok(a == b),
            (Value::List(a), Value::List(b)) => {
                if Rc::ptr_eq(a, b) {
                    return Ok(true);
                }
                if depth >= MAX_NESTING {
                    return Err(ErrorKind::RecursionDepth);
                }
                let (a, b) = (a.borrow(), b.borrow());
                if a.len() != b.len() {
                    return Ok(false);
                }
                for (x, y) in a.iter().zip(b.iter()) {
                    if !x.eq_at(y, depth + 1)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (Value::Dict(a), Value::Dict(b)) => {
                if Rc::ptr_eq(a, b) {
                    return Ok(true);
                }
                if depth >= MAX_NESTING {
                    return Err(ErrorKind::RecursionDepth);
                }
                let (a, b) = (a.borrow(), b.borrow());
                if a.len() != b.len() {
                    return Ok(false);
                }
                for (k, v) in a.iter() {
                    match b.get(k) {
                        Some(w) if v.eq_at(w, depth + 1)? => {}
                        _ => return Ok(false),
                    }
                }
                Ok(true)
            }
            (Value::None, Value::None) => Ok(true),
            _ => Ok(false),
        }
    }

    /// Python ordering for `<`, `<=`, `>`, `>=`.
    pub fn py_cmp(&self, other: &Value) -> Result<Ordering, ErrorKind> {
        self.cmp_at(other, 0)
    }

    fn cmp_at(&self, other: &Value, depth: usize) -> Result<Ordering, ErrorKind> {
        if let (Some(a), Some(b)) = (self.num(), other.num()) {
            // NaN compares false both ways; report it as "not less".
            return Ok(num_cmp(a, b).unwrap_or(Ordering::Equal));
        }
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => Ok(a.cmp(b)),
            (Value::List(a), Value::List(b)) => {
                if depth >= MAX_NESTING {
                    return Err(ErrorKind::RecursionDepth);
                }
                let (a, b) = (a.borrow().clone(), b.borrow().clone());
                for (x, y) in a.iter().zip(b.iter()) {
                    if !x.eq_at(y, depth + 1)? {
                        return x.cmp_at(y, depth + 1);
                    }
                }
                Ok(a.len().cmp(&b.len()))
            }
            _ => Err(ErrorKind::TypeError),
        }
    }

    /// Structural identity used by equality of outcomes and probes
    /// (distinguishes `1` from `1.0` and `True`, unlike `==`). Beyond the
    /// nesting limit only the very same container counts as identical.
    pub fn same(&self, other: &Value) -> bool {
        self.same_at(other, 0)
    }

    fn same_at(&self, other: &Value, depth: usize) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits() || a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::List(a), Value::List(b)) => {
                if Rc::ptr_eq(a, b) {
                    return true;
                }
                if depth >= MAX_NESTING {
                    return false;
                }
                let (a, b) = (a.borrow(), b.borrow());
                a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.same_at(y, depth + 1))
            }
            (Value::Dict(a), Value::Dict(b)) => {
                if Rc::ptr_eq(a, b) {
                    return true;
                }
                if depth >= MAX_NESTING {
                    return false;
                }
                let (a, b) = (a.borrow(), b.borrow());
                a.len() == b.len()
                    && a.iter()
                        .zip(b.iter())
                        .all(|((k, v), (k2, w))| k == k2 && v.same_at(w, depth + 1))
            }
            (Value::None, Value::None) => true,
            _ => false,
        }
    }

    pub fn from_json(j: &serde_json::Value) -> Value {
        match j {
            serde_json::Value::Null => Value::None,
            serde_json::Value::Bool(b) => Value::Bool(*b),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) => Value::Int(i),
                None => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            serde_json::Value::String(s) => Value::str(s),
            serde_json::Value::Array(items) => {
                Value::list(items.iter().map(Value::from_json).collect())
            }
            serde_json::Value::Object(map) => {
                let d: IndexMap<Key, Value> = map
                    .iter()
                    .map(|(k, v)| (Key::Str(k.as_str().into()), Value::from_json(v)))
                    .collect();
                Value::Dict(Rc::new(RefCell::new(d)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Num {
    I(i64),
    F(f64),
}

fn num_cmp(a: Num, b: Num) -> Option<Ordering> {
    match (a, b) {
        (Num::I(x), Num::I(y)) => Some(x.cmp(&y)),
        (Num::I(x), Num::F(y)) => cmp_int_float(x, y),
        (Num::F(x), Num::I(y)) => cmp_int_float(y, x).map(Ordering::reverse),
        (Num::F(x), Num::F(y)) => x.partial_cmp(&y),
    }
}

/// Exact comparison of an integer with a float.
fn cmp_int_float(i: i64, f: f64) -> Option<Ordering> {
    if f.is_nan() {
        return None;
    }
    if f >= 9.3e18 {
        return Some(Ordering::Less);
    }
    if f <= -9.3e18 {
        return Some(Ordering::Greater);
    }
    let fl = f.floor();
    let fi = fl as i64;
    match i.cmp(&fi) {
        Ordering::Equal if f > fl => Some(Ordering::Less),
        o => Some(o),
    }
}

fn int_floordiv(a: i64, b: i64) -> Result<i64, ErrorKind> {
    if b == 0 {
        return Err(ErrorKind::DivByZero);
    }
    let q = a.checked_div(b).ok_or(ErrorKind::Overflow)?;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

fn int_mod(a: i64, b: i64) -> Result<i64, ErrorKind> {
    if b == 0 {
        return Err(ErrorKind::DivByZero);
    }
    let r = a.checked_rem(b).unwrap_or(0);
    if r != 0 && ((r < 0) != (b < 0)) {
        Ok(r + b)
    } else {
        Ok(r)
    }
}

/// CPython's `float.__divmod__`.
fn float_divmod(vx: f64, wx: f64) -> Result<(f64, f64), ErrorKind> {
    if wx == 0.0 {
        return Err(ErrorKind::DivByZero);
    }
    let mut m = vx % wx;
    let mut div = (vx - m) / wx;
    if m != 0.0 {
        if (wx < 0.0) != (m < 0.0) {
            m += wx;
            div -= 1.0;
        }
    } else {
        m = 0.0f64.copysign(wx);
    }
    let fd = if div != 0.0 {
        let f = div.floor();
        if div - f > 0.5 {
            f + 1.0
        } else {
            f
        }
    } else {
        0.0f64.copysign(vx / wx)
    };
    Ok((fd, m))
}

fn float_result(f: f64) -> Result<Value, ErrorKind> {
    if f.is_infinite() {
        Err(ErrorKind::Overflow)
    } else {
        Ok(Value::Float(f))
    }
}

pub fn add(a: &Value, b: &Value) -> Result<Value, ErrorKind> {
    match (a.num(), b.num()) {
        (Some(Num::I(x)), Some(Num::I(y))) => {
            x.checked_add(y).map(Value::Int).ok_or(ErrorKind::Overflow)
        }
        (Some(_), Some(_)) => float_result(a.as_f64().unwrap() + b.as_f64().unwrap()),
        _ => match (a, b) {
            (Value::Str(x), Value::Str(y)) => Ok(Value::str(&format!("{x}{y}"))),
            (Value::List(x), Value::List(y)) => {
                let mut v = x.borrow().clone();
                v.extend(y.borrow().iter().cloned());
                Ok(Value::list(v))
            }
            _ => Err(ErrorKind::TypeError),
        },
    }
}

pub fn sub(a: &Value, b: &Value) -> Result<Value, ErrorKind> {
    match (a.num(), b.num()) {
        (Some(Num::I(x)), Some(Num::I(y))) => {
            x.checked_sub(y).map(Value::Int).ok_or(ErrorKind::Overflow)
        }
        (Some(_), Some(_)) => float_result(a.as_f64().unwrap() - b.as_f64().unwrap()),
        _ => Err(ErrorKind::TypeError),
    }
}

fn repeat(items: &[Value], n: i64) -> Result<Vec<Value>, ErrorKind> {
    let n = n.max(0) as usize;
    if items.len().saturating_mul(n) > 10_000_000 {
        return Err(ErrorKind::Overflow);
    }
    Ok(items
        .iter()
        .cloned()
        .cycle()
        .take(items.len() * n)
        .collect())
}

pub fn mul(a: &Value, b: &Value) -> Result<Value, ErrorKind> {
    match (a.num(), b.num()) {
        (Some(Num::I(x)), Some(Num::I(y))) => {
            x.checked_mul(y).map(Value::Int).ok_or(ErrorKind::Overflow)
        }
        (Some(_), Some(_)) => float_result(a.as_f64().unwrap() * b.as_f64().unwrap()),
        _ => {
            let (seq, n) = match (a, b) {
                (Value::Str(_) | Value::List(_), n) | (n, Value::Str(_) | Value::List(_)) => {
                    let seq = if matches!(a, Value::Str(_) | Value::List(_)) {
                        a
                    } else {
                        b
                    };
                    (seq, n.as_int().ok_or(ErrorKind::TypeError)?)
                }
                _ => return Err(ErrorKind::TypeError),
            };
            match seq {
                Value::Str(s) => {
                    let chars: Vec<Value> = vec![Value::Str(s.clone())];
                    let parts = repeat(&chars, n)?;
                    Ok(Value::str(
                        &parts.iter().map(Value::to_str).collect::<String>(),
                    ))
                }
                Value::List(l) => Ok(Value::list(repeat(&l.borrow(), n)?)),
                _ => Err(ErrorKind::TypeError),
            }
        }
    }
}

pub fn truediv(a: &Value, b: &Value) -> Result<Value, ErrorKind> {
    let (x, y) = (
        a.as_f64().ok_or(ErrorKind::TypeError)?,
        b.as_f64().ok_or(ErrorKind::TypeError)?,
    );
    if y == 0.0 {
        return Err(ErrorKind::DivByZero);
    }
    if let (Some(Num::I(i)), Some(Num::I(j))) = (a.num(), b.num()) {
        // Exact quotient when both operands are exactly representable.
        if i.unsigned_abs() < (1 << 53) && j.unsigned_abs() < (1 << 53) {
            return float_result(i as f64 / j as f64);
        }
    }
    float_result(x / y)
}

pub fn floordiv(a: &Value, b: &Value) -> Result<Value, ErrorKind> {
    match (a.num(), b.num()) {
        (Some(Num::I(x)), Some(Num::I(y))) => int_floordiv(x, y).map(Value::Int),
        (Some(_), Some(_)) => {
            float_divmod(a.as_f64().unwrap(), b.as_f64().unwrap()).map(|(d, _)| Value::Float(d))
        }
        _ => Err(ErrorKind::TypeError),
    }
}

pub fn modulo(a: &Value, b: &Value) -> Result<Value, ErrorKind> {
    match (a.num(), b.num()) {
        (Some(Num::I(x)), Some(Num::I(y))) => int_mod(x, y).map(Value::Int),
        (Some(_), Some(_)) => {
            float_divmod(a.as_f64().unwrap(), b.as_f64().unwrap()).map(|(_, m)| Value::Float(m))
        }
        _ => Err(ErrorKind::TypeError),
    }
}

pub fn power(a: &Value, b: &Value) -> Result<Value, ErrorKind> {
    match (a.num(), b.num()) {
        (Some(Num::I(x)), Some(Num::I(y))) => {
            if y >= 0 {
                let e = u32::try_from(y).map_err(|_| ErrorKind::Overflow)?;
                x.checked_pow(e).map(Value::Int).ok_or(ErrorKind::Overflow)
            } else if x == 0 {
                Err(ErrorKind::DivByZero)
            } else {
                float_result((x as f64).powf(y as f64))
            }
        }
        (Some(_), Some(_)) => {
            let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            if x == 0.0 && y < 0.0 {
                return Err(ErrorKind::DivByZero);
            }
            if x < 0.0 && y.fract() != 0.0 {
                // Python would produce a complex number.
                return Err(ErrorKind::ValueError);
            }
            float_result(x.powf(y))
        }
        _ => Err(ErrorKind::TypeError),
    }
}

pub fn neg(a: &Value) -> Result<Value, ErrorKind> {
    match a.num() {
        Some(Num::I(x)) => x.checked_neg().map(Value::Int).ok_or(ErrorKind::Overflow),
        Some(Num::F(x)) => Ok(Value::Float(-x)),
        None => Err(ErrorKind::TypeError),
    }
}

/// Resolves a possibly negative index against a length.
pub fn norm_index(idx: &Value, len: usize) -> Result<usize, ErrorKind> {
    let i = idx.as_int().ok_or(ErrorKind::TypeError)?;
    let len = len as i64;
    let j = if i < 0 { i + len } else { i };
    if j < 0 || j >= len {
        Err(ErrorKind::IndexOutOfRange)
    } else {
        Ok(j as usize)
    }
}

/// Python slice bounds clamping for `[lower:upper]`.
pub fn slice_bounds(lower: Option<i64>, upper: Option<i64>, len: usize) -> (usize, usize) {
    let len = len as i64;
    let clamp = |v: i64| -> i64 {
        let v = if v < 0 { v + len } else { v };
        v.clamp(0, len)
    };
    let lo = lower.map(clamp).unwrap_or(0);
    let hi = upper.map(clamp).unwrap_or(len);
    (lo as usize, hi.max(lo) as usize)
}

/// Python comparison operators, including the NaN behaviour of floats.
pub fn compare(op: crate::lang::BinOp, a: &Value, b: &Value) -> Result<bool, ErrorKind> {
    use crate::lang::BinOp::*;
    match op {
        Eq => return a.py_eq(b),
        Ne => return a.py_eq(b).map(|e| !e),
        _ => {}
    }
    let ord = match (a.num(), b.num()) {
        (Some(x), Some(y)) => match num_cmp(x, y) {
            Some(o) => o,
            None => return Ok(false),
        },
        _ => a.py_cmp(b)?,
    };
    Ok(match op {
        Lt => ord == Ordering::Less,
        Le => ord != Ordering::Greater,
        Gt => ord == Ordering::Greater,
        Ge => ord != Ordering::Less,
        _ => unreachable!("not a comparison"),
    })
}
