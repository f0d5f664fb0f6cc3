//! Straight-line programs of two-operand additions and constant
//! multiplications.
//!
//! Step `k` always writes temporary `t_k`, so a schedule is a list of
//! operations plus the slots holding each output.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};
use core::str::FromStr;

use crate::bitmat::{Additive, SymbolicSum};
use crate::cfft::CfftPlan;
use crate::error::{Error, Result};
use crate::gf2m::{FieldElement, FieldSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Zero,
    Input(usize),
    Temp(usize),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Zero => f.write_str("0"),
            Slot::Input(i) => write!(f, "x{i}"),
            Slot::Temp(t) => write!(f, "t{t}"),
        }
    }
}

impl FromStr for Slot {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        let num = |rest: &str| rest.parse::<usize>().map_err(|_| format!("bad slot `{s}`"));
        match s.as_bytes().first() {
            Some(b'0') if s == "0" => Ok(Slot::Zero),
            Some(b'x') => num(&s[1..]).map(Slot::Input),
            Some(b't') => num(&s[1..]).map(Slot::Temp),
            _ => Err(format!("bad slot `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Add { lhs: Slot, rhs: Slot },
    /// `constants[constant] * src`
    Mul { constant: usize, src: Slot },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub n_inputs: usize,
    pub steps: Vec<Step>,
    pub outputs: Vec<Slot>,
    pub constants: Vec<FieldElement>,
}

impl Schedule {
    pub fn additions(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Add { .. })).count()
    }

    pub fn multiplications(&self) -> usize {
        self.steps.len() - self.additions()
    }

    /// Additions plus `2m - 1` per multiplication.
    pub fn total_complexity(&self, m: u32) -> usize {
        self.additions() + (2 * m as usize - 1) * self.multiplications()
    }

    /// Checks that every operand is defined before it is read.
    pub fn validate(&self) -> Result<()> {
        let ok = |slot: Slot, k: usize| match slot {
            Slot::Zero => true,
            Slot::Input(i) => i < self.n_inputs,
            Slot::Temp(t) => t < k,
        };
        for (k, step) in self.steps.iter().enumerate() {
            let good = match *step {
                Step::Add { lhs, rhs } => ok(lhs, k) && ok(rhs, k),
                Step::Mul { constant, src } => constant < self.constants.len() && ok(src, k),
            };
            if !good {
                return Err(Error::UndefinedOperand(k));
            }
        }
        if let Some(p) = self.outputs.iter().position(|&s| !ok(s, self.steps.len())) {
            return Err(Error::Parse { line: 0, msg: format!("output {p} reads an undefined slot") });
        }
        Ok(())
    }

    /// Runs the program. Multiplications need `field` and a value type that
    /// supports scaling.
    pub fn execute<T: Additive>(&self, field: Option<&FieldSpec>, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n_inputs {
            return Err(Error::DimensionMismatch { expected: self.n_inputs, found: x.len() });
        }
        self.validate()?;
        let mut temps: Vec<T> = Vec::with_capacity(self.steps.len());
        let read = |slot: Slot, temps: &[T]| match slot {
            Slot::Zero => T::zero(),
            Slot::Input(i) => x[i].clone(),
            Slot::Temp(t) => temps[t].clone(),
        };
        for step in &self.steps {
            let v = match *step {
                Step::Add { lhs, rhs } => {
                    let mut v = read(lhs, &temps);
                    v.add_assign(&read(rhs, &temps));
                    v
                }
                Step::Mul { constant, src } => {
                    let field = field.ok_or(Error::UnsupportedMultiply)?;
                    read(src, &temps)
                        .scale(field, self.constants[constant])
                        .ok_or(Error::UnsupportedMultiply)?
                }
            };
            temps.push(v);
        }
        Ok(self.outputs.iter().map(|&s| read(s, &temps)).collect())
    }

    /// Runs an addition-only program on the formal inputs `X_0, X_1, ...`.
    pub fn execute_symbolic(&self) -> Result<Vec<SymbolicSum>> {
        self.execute(None, &SymbolicSum::vars(self.n_inputs))
    }

    /// Chains a pre-addition program, the plan's constants and a
    /// post-addition program into one program computing the DFT in natural
    /// order. Products by 1 are skipped.
    pub fn compose_plan(plan: &CfftPlan, pre: &Schedule, post: &Schedule) -> Result<Schedule> {
        let n = plan.n();
        let t = plan.constants.len();
        for (found, expected) in [
            (pre.n_inputs, n),
            (pre.outputs.len(), t),
            (post.n_inputs, t),
            (post.outputs.len(), n),
        ] {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        let mut out = Schedule { n_inputs: n, ..Schedule::default() };
        let pre_map = |s: Slot| match s {
            Slot::Input(i) => Slot::Input(plan.in_perm.get(i)),
            other => other,
        };
        for step in &pre.steps {
            let mapped = match *step {
                Step::Add { lhs, rhs } => Step::Add { lhs: pre_map(lhs), rhs: pre_map(rhs) },
                Step::Mul { constant, src } => {
                    let idx = out.intern(pre.constants[constant]);
                    Step::Mul { constant: idx, src: pre_map(src) }
                }
            };
            out.steps.push(mapped);
        }
        let mut z = Vec::with_capacity(t);
        for (k, &y) in pre.outputs.iter().enumerate() {
            let y = pre_map(y);
            let c = plan.constants[k];
            if c == FieldElement::ONE || y == Slot::Zero {
                z.push(y);
            } else {
                let idx = out.intern(c);
                out.steps.push(Step::Mul { constant: idx, src: y });
                z.push(Slot::Temp(out.steps.len() - 1));
            }
        }
        let offset = out.steps.len();
        let post_map = |s: Slot| match s {
            Slot::Input(k) => z[k],
            Slot::Temp(tk) => Slot::Temp(tk + offset),
            Slot::Zero => Slot::Zero,
        };
        for step in &post.steps {
            let mapped = match *step {
                Step::Add { lhs, rhs } => Step::Add { lhs: post_map(lhs), rhs: post_map(rhs) },
                Step::Mul { constant, src } => {
                    let idx = out.intern(post.constants[constant]);
                    Step::Mul { constant: idx, src: post_map(src) }
                }
            };
            out.steps.push(mapped);
        }
        out.outputs = vec![Slot::Zero; n];
        for (i, &w) in post.outputs.iter().enumerate() {
            out.outputs[plan.out_perm.get(i)] = post_map(w);
        }
        Ok(out)
    }

    fn intern(&mut self, c: FieldElement) -> usize {
        match self.constants.iter().position(|&x| x == c) {
            Some(i) => i,
            None => {
                self.constants.push(c);
                self.constants.len() - 1
            }
        }
    }

    /// Line-oriented listing, parsed back by [`Schedule::parse`].
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "schedule {} {} {} {}",
            self.n_inputs,
            self.outputs.len(),
            self.additions(),
            self.multiplications()
        );
        for (k, step) in self.steps.iter().enumerate() {
            let _ = match step {
                Step::Add { lhs, rhs } => writeln!(s, "t{k} = {lhs} + {rhs}"),
                Step::Mul { constant, src } => writeln!(s, "t{k} = c[{constant}] * {src}"),
            };
        }
        for (j, out) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "F{j} = {out}");
        }
        for (k, c) in self.constants.iter().enumerate() {
            let _ = writeln!(s, "c[{k}] = {c}");
        }
        s
    }

    /// C-like listing over an abstract field type with `add` and `mul`.
    pub fn emit_pseudocode(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "void {name}(const gf x[{}], gf F[{}]) {{", self.n_inputs, self.outputs.len());
        for (k, c) in self.constants.iter().enumerate() {
            let _ = writeln!(s, "    const gf c{k} = {c};");
        }
        let operand = |slot: &Slot| match slot {
            Slot::Zero => "0".to_string(),
            Slot::Input(i) => format!("x[{i}]"),
            Slot::Temp(t) => format!("t{t}"),
        };
        for (k, step) in self.steps.iter().enumerate() {
            let _ = match step {
                Step::Add { lhs, rhs } => {
                    writeln!(s, "    gf t{k} = add({}, {});", operand(lhs), operand(rhs))
                }
                Step::Mul { constant, src } => {
                    writeln!(s, "    gf t{k} = mul(c{constant}, {});", operand(src))
                }
            };
        }
        for (j, out) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "    F[{j}] = {};", operand(out));
        }
        s.push_str("}\n");
        s
    }

    pub fn parse(text: &str) -> Result<Schedule> {
        let err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| err(1, "empty schedule".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "schedule" {
            return Err(err(hl, "expected `schedule n_in n_out adds muls`".into()));
        }
        let nums: Vec<usize> = h[1..]
            .iter()
            .map(|x| x.parse().map_err(|_| err(hl, format!("bad number `{x}`"))))
            .collect::<Result<_>>()?;
        let mut s = Schedule { n_inputs: nums[0], ..Schedule::default() };
        let mut outputs: BTreeMap<usize, Slot> = BTreeMap::new();
        let mut constants: BTreeMap<usize, FieldElement> = BTreeMap::new();
        for (ln, line) in lines {
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| err(ln, "expected `lhs = rhs`".into()))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            let slot = |x: &str| x.trim().parse::<Slot>().map_err(|m| err(ln, m));
            let index = |x: &str| x.parse::<usize>().map_err(|_| err(ln, format!("bad index `{x}`")));
            if let Some(k) = lhs.strip_prefix('t') {
                if index(k)? != s.steps.len() {
                    return Err(err(ln, format!("expected t{}", s.steps.len())));
                }
                let step = if let Some((c, src)) = rhs.split_once('*') {
                    let c = c.trim();
                    let k = c
                        .strip_prefix("c[")
                        .and_then(|c| c.strip_suffix(']'))
                        .ok_or_else(|| err(ln, format!("bad constant `{c}`")))?;
                    Step::Mul { constant: index(k)?, src: slot(src)? }
                } else {
                    let (a, b) = rhs
                        .split_once('+')
                        .ok_or_else(|| err(ln, "expected `a + b` or `c[k] * a`".into()))?;
                    Step::Add { lhs: slot(a)?, rhs: slot(b)? }
                };
                s.steps.push(step);
            } else if let Some(j) = lhs.strip_prefix('F') {
                outputs.insert(index(j)?, slot(rhs)?);
            } else if let Some(k) = lhs.strip_prefix("c[").and_then(|k| k.strip_suffix(']')) {
                let hex = rhs.trim_start_matches("0x").trim_start_matches("0X");
                let v = u16::from_str_radix(hex, 16)
                    .map_err(|_| err(ln, format!("bad constant value `{rhs}`")))?;
                constants.insert(index(k)?, FieldElement(v));
            } else {
                return Err(err(ln, format!("unrecognised line `{line}`")));
            }
        }
        if outputs.keys().copied().ne(0..nums[1]) {
            return Err(err(hl, format!("expected outputs F0..F{}", nums[1].saturating_sub(1))));
        }
        s.outputs = outputs.into_values().collect();
        if constants.keys().copied().ne(0..constants.len()) {
            return Err(err(hl, "constants must be numbered 0, 1, ...".into()));
        }
        s.constants = constants.into_values().collect();
        if s.additions() != nums[2] || s.multiplications() != nums[3] {
            return Err(err(hl, "header counts disagree with the step list".into()));
        }
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Schedule {
        Schedule {
            n_inputs: 3,
            steps: vec![
                Step::Add { lhs: Slot::Input(0), rhs: Slot::Input(1) },
                Step::Mul { constant: 0, src: Slot::Temp(0) },
                Step::Add { lhs: Slot::Temp(1), rhs: Slot::Input(2) },
            ],
            outputs: vec![Slot::Temp(2), Slot::Zero, Slot::Input(1)],
            constants: vec![FieldElement(6)],
        }
    }

    #[test]
    fn counts_and_totals() {
        let s = tiny();
        assert_eq!(s.additions(), 2);
        assert_eq!(s.multiplications(), 1);
        assert_eq!(s.total_complexity(3), 2 + 5);
        assert_eq!(Schedule::default().total_complexity(8), 0);
    }

    #[test]
    fn emit_parse_round_trip() {
        let s = tiny();
        let text = s.emit();
        assert!(text.starts_with("schedule 3 3 2 1\n"));
        let back = Schedule::parse(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.emit(), text);
        let empty = Schedule { n_inputs: 2, ..Schedule::default() };
        assert_eq!(empty.emit(), "schedule 2 0 0 0\n");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Schedule::parse("").is_err());
        assert!(Schedule::parse("schedule 2 1 1 0\nt0 = x0 + t3\nF0 = t0\n").is_err());
        assert!(Schedule::parse("schedule 2 1 1 0\nt1 = x0 + x1\nF0 = t0\n").is_err());
        assert!(Schedule::parse("schedule 2 1 2 0\nt0 = x0 + x1\nF0 = t0\n").is_err());
    }

    #[test]
    fn execute_field_and_symbolic() {
        let f = FieldSpec::new(3).unwrap();
        let x = [FieldElement(1), FieldElement(2), FieldElement(4)];
        let y = tiny().execute(Some(&f), &x).unwrap();
        assert_eq!(y[0], f.mul(FieldElement(3), FieldElement(6)) + FieldElement(4));
        assert_eq!(y[1], FieldElement::ZERO);
        assert_eq!(tiny().execute_symbolic(), Err(Error::UnsupportedMultiply));
        let empty = Schedule {
            n_inputs: 2,
            outputs: vec![Slot::Input(1), Slot::Input(0)],
            ..Schedule::default()
        };
        assert_eq!(
            empty.execute_symbolic().unwrap(),
            vec![SymbolicSum::var(1), SymbolicSum::var(0)]
        );
    }
}
