//! Minimal tape-based reverse-mode differentiation over [`Real`].

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::geometry::{log_scale_partials, log_scale_value, Real};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    lhs: u32,
    rhs: u32,
    d_lhs: f64,
    d_rhs: f64,
}

/// Records every operation on [`Var`]s created from it.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    /// Scratch adjoints, kept between passes to reuse the allocation.
    scratch: RefCell<Vec<f64>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Empties the tape, keeping its allocation.
    pub fn reset(&mut self) {
        self.nodes.get_mut().clear();
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// An independent variable.
    pub fn var(&self, value: f64) -> Var<'_> {
        let index = self.push(Node {
            lhs: NONE,
            rhs: NONE,
            d_lhs: 0.0,
            d_rhs: 0.0,
        });
        Var {
            tape: Some(self),
            index,
            value,
        }
    }

    /// Independent variables for `values`, in order.
    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    fn push(&self, node: Node) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let index = u32::try_from(nodes.len()).expect("tape overflow");
        nodes.push(node);
        index
    }

    /// Back-propagates from `output`; returns the adjoint of every recorded node.
    pub fn adjoints(&self, output: Var<'_>) -> Vec<f64> {
        let mut adj = Vec::new();
        self.backward(output, &mut adj);
        adj
    }

    fn backward(&self, output: Var<'_>, adj: &mut Vec<f64>) {
        let nodes = self.nodes.borrow();
        adj.clear();
        adj.resize(nodes.len(), 0.0);
        if output.index == NONE {
            return;
        }
        adj[output.index as usize] = 1.0;
        for i in (0..=output.index as usize).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let n = nodes[i];
            if n.lhs != NONE {
                adj[n.lhs as usize] += a * n.d_lhs;
            }
            if n.rhs != NONE {
                adj[n.rhs as usize] += a * n.d_rhs;
            }
        }
    }

    /// Gradient of `output` with respect to `inputs`.
    pub fn gradient(&self, output: Var<'_>, inputs: &[Var<'_>]) -> Vec<f64> {
        let mut adj = self.scratch.borrow_mut();
        self.backward(output, &mut adj);
        inputs
            .iter()
            .map(|v| if v.index == NONE { 0.0 } else { adj[v.index as usize] })
            .collect()
    }
}

/// A scalar whose arithmetic is recorded on a [`Tape`]. Constants carry no tape.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    index: u32,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var({})", self.value)
    }
}

impl<'t> Var<'t> {
    fn unary(self, value: f64, d: f64) -> Self {
        match self.tape {
            None => Var::constant(value),
            Some(tape) => Var {
                tape: Some(tape),
                index: tape.push(Node {
                    lhs: self.index,
                    rhs: NONE,
                    d_lhs: d,
                    d_rhs: 0.0,
                }),
                value,
            },
        }
    }

    fn binary(self, other: Self, value: f64, d_self: f64, d_other: f64) -> Self {
        match self.tape.or(other.tape) {
            None => Var::constant(value),
            Some(tape) => Var {
                tape: Some(tape),
                index: tape.push(Node {
                    lhs: self.index,
                    rhs: other.index,
                    d_lhs: d_self,
                    d_rhs: d_other,
                }),
                value,
            },
        }
    }
}

impl Real for Var<'_> {
    fn constant(v: f64) -> Self {
        Var {
            tape: None,
            index: NONE,
            value: v,
        }
    }

    fn value(self) -> f64 {
        self.value
    }

    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        // the derivative at 0 is taken as 0 (a subgradient of the norm)
        let d = if s > 0.0 { 0.5 / s } else { 0.0 };
        self.unary(s, d)
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.unary(e, e)
    }

    fn log_scale(s2: Self, w: Self) -> Self {
        let (d_s2, d_w) = log_scale_partials(s2.value, w.value);
        s2.binary(w, log_scale_value(s2.value, w.value), d_s2, d_w)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.binary(o, self.value + o.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.binary(o, self.value - o.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.binary(o, self.value * o.value, o.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.value;
        self.binary(o, self.value * inv, inv, -self.value * inv * inv)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(-self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Self;
    fn add(self, k: f64) -> Self {
        self.unary(self.value + k, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Self;
    fn sub(self, k: f64) -> Self {
        self.unary(self.value - k, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.unary(self.value * k, k)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Self;
    fn div(self, k: f64) -> Self {
        self.unary(self.value / k, 1.0 / k)
    }
}
