//! Periodic Lagrange interpolation on uniform grids.

#[allow(unused_imports)]
use num_traits::Float;

use crate::field::PhaseSpaceField;
use crate::{Error, Result};

pub const MAX_ORDER: usize = 10;

/// Weights at `frac ∈ [0, 1)` for the `order` nodes `1 − order/2 ..= order/2`.
pub fn lagrange_weights(frac: f64, order: usize, w: &mut [f64]) {
    let first = 1.0 - (order / 2) as f64;
    for (i, wi) in w.iter_mut().enumerate().take(order) {
        let ti = first + i as f64;
        let mut num = 1.0;
        let mut den = 1.0;
        for j in 0..order {
            if j != i {
                let tj = first + j as f64;
                num *= frac - tj;
                den *= ti - tj;
            }
        }
        *wi = num / den;
    }
}

/// Interpolates a periodic table at fractional index `u`.
pub fn periodic(table: &[f64], u: f64, order: usize) -> f64 {
    let n = table.len() as i64;
    let base = u.floor();
    let frac = u - base;
    let mut w = [0.0; MAX_ORDER];
    lagrange_weights(frac, order, &mut w);
    let start = base as i64 + 1 - (order / 2) as i64;
    (0..order)
        .map(|i| w[i] * table[(start + i as i64).rem_euclid(n) as usize])
        .sum()
}

fn check_order(order: usize) -> Result<()> {
    if order < 2 || !order.is_multiple_of(2) || order > MAX_ORDER {
        return Err(Error::Domain(alloc::format!(
            "interpolation order {order} must be even and in [2, {MAX_ORDER}]"
        )));
    }
    Ok(())
}

/// Tensor-product periodic interpolation of a phase-space field.
#[derive(Debug, Clone, Copy)]
pub struct GridInterpolant<'a> {
    field: &'a PhaseSpaceField,
    order: usize,
}

impl<'a> GridInterpolant<'a> {
    pub fn new(field: &'a PhaseSpaceField, order: usize) -> Result<Self> {
        check_order(order)?;
        Ok(Self { field, order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let axes = self.field.grid().axes();
        let d = axes.len();
        let p = self.order;
        let mut w = [[0.0; MAX_ORDER]; 4];
        let mut start = [0i64; 4];
        for a in 0..d {
            let u = (z[a] - axes[a].min) / axes[a].spacing();
            let base = u.floor();
            lagrange_weights(u - base, p, &mut w[a]);
            start[a] = base as i64 + 1 - (p / 2) as i64;
        }
        let values = self.field.values();
        if d == 2 {
            let (n0, n1) = (axes[0].len as i64, axes[1].len as i64);
            let mut acc = 0.0;
            for i in 0..p {
                let r = (start[0] + i as i64).rem_euclid(n0) as usize * n1 as usize;
                let mut row = 0.0;
                for j in 0..p {
                    row += w[1][j] * values[r + (start[1] + j as i64).rem_euclid(n1) as usize];
                }
                acc += w[0][i] * row;
            }
            return acc;
        }
        let mut idx = [0usize; 4];
        let total = p.pow(d as u32);
        let mut acc = 0.0;
        for t in 0..total {
            let mut rem = t;
            for a in (0..d).rev() {
                idx[a] = rem % p;
                rem /= p;
            }
            let mut flat = 0usize;
            let mut weight = 1.0;
            for a in 0..d {
                let n = axes[a].len as i64;
                flat = flat * axes[a].len + (start[a] + idx[a] as i64).rem_euclid(n) as usize;
                weight *= w[a][idx[a]];
            }
            acc += weight * values[flat];
        }
        acc
    }
}
