//! Forward-mode dual numbers with a dense gradient of runtime length.
//!
//! Gradients of different lengths may be mixed: missing trailing entries are
//! zero. A dual with an empty gradient is a plain constant and costs no
//! allocation, so the same code path serves value-only evaluation.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub g: Vec<f64>,
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Self { v, g: Vec::new() }
    }

    pub fn new(v: f64, g: Vec<f64>) -> Self {
        Self { v, g }
    }

    /// `v` seeded as variable `idx` of `n`.
    pub fn variable(v: f64, idx: usize, n: usize) -> Self {
        let mut g = vec![0.0; n];
        g[idx] = 1.0;
        Self { v, g }
    }

    /// Result with value `v` and gradient `da * a.g + db * b.g`.
    pub fn lin2(v: f64, a: &Dual, da: f64, b: &Dual, db: f64) -> Dual {
        let n = a.g.len().max(b.g.len());
        let mut g = vec![0.0; n];
        for (gi, ai) in g.iter_mut().zip(&a.g) {
            *gi += da * ai;
        }
        for (gi, bi) in g.iter_mut().zip(&b.g) {
            *gi += db * bi;
        }
        Dual { v, g }
    }

    /// Chain rule for a unary map with value `v` and derivative `dv`.
    pub fn chain(&self, v: f64, dv: f64) -> Dual {
        Dual {
            v,
            g: self.g.iter().map(|x| x * dv).collect(),
        }
    }

    pub fn sqrt(&self) -> Dual {
        let s = self.v.sqrt();
        let d = if s > 0.0 { 0.5 / s } else { 0.0 };
        self.chain(s, d)
    }

    pub fn exp(&self) -> Dual {
        let e = self.v.exp();
        self.chain(e, e)
    }

    pub fn ln(&self) -> Dual {
        self.chain(self.v.ln(), 1.0 / self.v)
    }

    /// `max(self, other)`; the gradient follows the selected argument.
    pub fn max(&self, other: &Dual) -> Dual {
        if other.v > self.v {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, k: f64) -> Dual {
        self.chain(self.v * k, k)
    }

    /// Accumulate `w * self.g` into `out`.
    pub fn add_grad_to(&self, w: f64, out: &mut [f64]) {
        for (o, gi) in out.iter_mut().zip(&self.g) {
            *o += w * gi;
        }
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, |$a:ident, $b:ident| $body:expr) => {
        impl $trait<&Dual> for &Dual {
            type Output = Dual;
            fn $method(self, rhs: &Dual) -> Dual {
                let ($a, $b) = (self, rhs);
                $body
            }
        }
        impl $trait<Dual> for Dual {
            type Output = Dual;
            fn $method(self, rhs: Dual) -> Dual {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Dual> for Dual {
            type Output = Dual;
            fn $method(self, rhs: &Dual) -> Dual {
                (&self).$method(rhs)
            }
        }
        impl $trait<Dual> for &Dual {
            type Output = Dual;
            fn $method(self, rhs: Dual) -> Dual {
                self.$method(&rhs)
            }
        }
        impl $trait<f64> for &Dual {
            type Output = Dual;
            fn $method(self, rhs: f64) -> Dual {
                self.$method(&Dual::constant(rhs))
            }
        }
        impl $trait<f64> for Dual {
            type Output = Dual;
            fn $method(self, rhs: f64) -> Dual {
                (&self).$method(&Dual::constant(rhs))
            }
        }
    };
}

binop!(Add, add, |a, b| Dual::lin2(a.v + b.v, a, 1.0, b, 1.0));
binop!(Sub, sub, |a, b| Dual::lin2(a.v - b.v, a, 1.0, b, -1.0));
binop!(Mul, mul, |a, b| Dual::lin2(a.v * b.v, a, b.v, b, a.v));
binop!(Div, div, |a, b| {
    let q = a.v / b.v;
    Dual::lin2(q, a, 1.0 / b.v, b, -q / b.v)
});

impl Neg for &Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        self.scale(-1.0)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        self.scale(-1.0)
    }
}
