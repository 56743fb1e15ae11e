//! Seeded generator of small, terminating script programs.
//!
//! Programs read two integers, then mix constant and copy assignments,
//! bounded loops, branches and list aliasing, so that both analyses find
//! something to say about them. Arithmetic stays bounded: products are
//! reduced modulo a small prime and loops run a handful of times.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::interp::manifest::Domain;
use crate::interp::TestManifest;
use crate::lang::{parse, Program};

const POOL: [&str; 5] = ["a", "b", "c", "d", "e"];
const MODULUS: i64 = 1009;

struct Gen {
    rng: ChaCha8Rng,
    out: String,
    /// Variables bound on every path reaching the current point.
    bound: Vec<&'static str>,
    has_list: bool,
    counters: usize,
    fun: bool,
}

impl Gen {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn var(&mut self) -> &'static str {
        self.bound
            .choose(&mut self.rng)
            .copied()
            .expect("inputs are always bound")
    }

    fn small(&mut self) -> i64 {
        self.rng.gen_range(-3..=9)
    }

    fn operand(&mut self) -> String {
        if self.rng.gen_bool(0.6) {
            self.var().to_string()
        } else {
            self.small().to_string()
        }
    }

    fn expr(&mut self) -> String {
        match self.rng.gen_range(0..7) {
            0 => self.small().to_string(),
            1 => self.var().to_string(),
            2 => format!("{} + {}", self.operand(), self.operand()),
            3 => format!("{} - {}", self.operand(), self.operand()),
            4 => format!("({} * {}) % {MODULUS}", self.operand(), self.operand()),
            5 if self.fun => format!("f1({}, {})", self.operand(), self.operand()),
            5 | 6 if self.has_list => format!("xs[{}]", self.rng.gen_range(0..2)),
            _ => format!("{} + {}", self.var(), self.small()),
        }
    }

    fn cond(&mut self) -> String {
        let op = ["<", "<=", ">", ">=", "==", "!="]
            .choose(&mut self.rng)
            .copied()
            .expect("non-empty");
        format!("{} {op} {}", self.var(), self.operand())
    }

    fn assign(&mut self, depth: usize, target: &'static str, value: String) {
        self.line(depth, &format!("{target} = {value}"));
        if !self.bound.contains(&target) {
            self.bound.push(target);
        }
    }

    fn block(&mut self, depth: usize, len: usize) {
        for _ in 0..len {
            self.stmt(depth);
        }
    }

    /// Runs `f` for a nested block, forgetting bindings made inside it.
    fn nested(&mut self, f: impl FnOnce(&mut Gen)) {
        let saved = self.bound.clone();
        f(self);
        self.bound = saved;
    }

    fn stmt(&mut self, depth: usize) {
        let target = *POOL.choose(&mut self.rng).expect("non-empty");
        match self.rng.gen_range(0..13) {
            0 | 1 => {
                let k = self.small();
                self.assign(depth, target, k.to_string());
            }
            2 | 3 => {
                let v = self.var();
                self.assign(depth, target, v.to_string());
            }
            4 | 5 => {
                let e = self.expr();
                self.assign(depth, target, e);
            }
            6 => {
                let e = self.expr();
                self.line(depth, &format!("print({e})"));
            }
            7 if depth < 3 => {
                let c = self.cond();
                self.line(depth, &format!("if {c}:"));
                let n = self.rng.gen_range(1..=3);
                self.nested(|g| g.block(depth + 1, n));
                if self.rng.gen_bool(0.5) {
                    self.line(depth, "else:");
                    let n = self.rng.gen_range(1..=2);
                    self.nested(|g| g.block(depth + 1, n));
                }
            }
            8 if depth < 3 => {
                let k = self.rng.gen_range(0..=5);
                let i = format!("i{depth}");
                self.line(depth, &format!("for {i} in range({k}):"));
                let n = self.rng.gen_range(1..=3);
                self.nested(|g| {
                    let v = g.var();
                    g.line(depth + 1, &format!("{v} = {v} + {i}"));
                    g.block(depth + 1, n);
                });
            }
            9 if depth < 3 => {
                let c = format!("n{}", self.counters);
                self.counters += 1;
                let k = self.rng.gen_range(0..=4);
                self.line(depth, &format!("{c} = 0"));
                self.line(depth, &format!("while {c} < {k}:"));
                let n = self.rng.gen_range(1..=3);
                self.nested(|g| g.block(depth + 1, n));
                self.line(depth + 1, &format!("{c} = {c} + 1"));
            }
            10 | 11 if self.has_list => {
                let v = self.var();
                match self.rng.gen_range(0..3) {
                    0 => self.line(depth, &format!("ys.append({v})")),
                    1 => {
                        let k = self.rng.gen_range(0..2);
                        self.line(depth, &format!("ys[{k}] = {v}"));
                    }
                    _ => self.line(depth, "print(xs)"),
                }
            }
            _ => {
                let v = self.var();
                self.line(depth, &format!("print({v})"));
            }
        }
    }
}

/// Source text of the `index`-th program of the family seeded by `seed`.
pub fn fuzz_source(seed: u64, index: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        out: String::new(),
        bound: Vec::new(),
        has_list: false,
        counters: 0,
        fun: false,
    };
    if g.rng.gen_bool(0.3) {
        g.fun = true;
        g.line(0, "def f1(p, q):");
        g.line(1, "r = p");
        g.line(1, "if q > p:");
        g.line(2, "r = q");
        g.line(1, "return r - 1");
    }
    g.assign(0, "a", "int(input())".into());
    g.assign(0, "b", "int(input())".into());
    if g.rng.gen_bool(0.4) {
        g.has_list = true;
        g.line(0, "xs = [a, b]");
        g.line(0, "ys = xs");
    }
    let n = g.rng.gen_range(4..=10);
    g.block(0, n);
    let v = g.var();
    g.line(0, &format!("print({v})"));
    g.out
}

pub fn fuzz_program(seed: u64, index: u64) -> Program {
    parse(&fuzz_source(seed, index)).expect("generated programs parse")
}

/// Two integer inputs on the tape, at least 20 cases.
pub fn fuzz_manifest() -> TestManifest {
    let mut m = TestManifest::script(Vec::<Vec<String>>::new());
    m.domains = vec![
        Domain::Int { min: -3, max: 4 },
        Domain::Int { min: -3, max: 4 },
    ];
    m.min_cases = 20;
    m.fuel = 100_000;
    m
}
