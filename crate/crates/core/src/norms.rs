//! Norms on phase-space fields: `L²`, integer Sobolev `Hᵐ`, the weighted
//! spectral family `𝒳^{m,p}`, and the growth constants `D(m,n)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::field::Spectrum;
use crate::potentials::{FourierPotential, Moment};
use crate::{Error, PhaseSpaceField, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    /// `m > 0`: `Σ_{|a|+|b|≤m} ‖∂ₓᵃ∂ₖᵇ f‖`; `m ≤ 0`: `‖(1+|Z|²)^{m/2} f̂‖`.
    Sobolev(i32),
    /// `‖|Z|ᵐ f̂‖_{Lᵖ}`; `p = ∞` takes the grid maximum.
    Xmp {
        m: f64,
        p: f64,
    },
}

pub fn norm(field: &PhaseSpaceField, kind: NormKind) -> Result<f64> {
    if field.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("field has non-finite values".into()));
    }
    match kind {
        NormKind::L2 => Ok(field.l2_norm()),
        NormKind::Sobolev(m) => {
            let s = field.spectrum()?;
            if m > 0 {
                Ok(derivative_sum(&s, m as u32))
            } else {
                Ok(single_weight(&s, m as f64))
            }
        }
        NormKind::Xmp { m, p } => weighted_lp(&field.spectrum()?, m, p),
    }
}

/// `‖(1+|Z|²)^{m/2} f̂‖_{L²}` for any real `m`; equivalent to `Hᵐ`.
pub fn sobolev_single_weight(field: &PhaseSpaceField, m: f64) -> Result<f64> {
    Ok(single_weight(&field.spectrum()?, m))
}

fn single_weight(s: &Spectrum, m: f64) -> f64 {
    s.weighted_l2(|z| (1.0 + z.iter().map(|v| v * v).sum::<f64>()).powf(m / 2.0))
}

fn multi_indices(d: usize, m: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    let mut cur = [0u32; 4];
    fn rec(pos: usize, left: u32, d: usize, cur: &mut [u32; 4], out: &mut Vec<[u32; 4]>) {
        if pos == d {
            out.push(*cur);
            return;
        }
        for a in 0..=left {
            cur[pos] = a;
            rec(pos + 1, left - a, d, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, m, d, &mut cur, &mut out);
    out
}

fn derivative_sum(s: &Spectrum, m: u32) -> f64 {
    let d = s.grid().axes().len();
    let grid = s.grid();
    let cell = s.cell_volume();
    let power: Vec<f64> = s.values().iter().map(|c| c.norm_sqr()).collect();
    let mut freqs = vec![0.0; grid.len() * d];
    for (i, row) in freqs.chunks_exact_mut(d).enumerate() {
        grid.frequency(i, row);
        row.iter_mut().for_each(|v| *v *= 2.0 * PI);
    }
    multi_indices(d, m)
        .iter()
        .map(|alpha| {
            let acc: f64 = power
                .iter()
                .zip(freqs.chunks_exact(d))
                .map(|(p, z)| {
                    let w: f64 = (0..d).map(|a| z[a].powi(alpha[a] as i32)).product();
                    w * w * p
                })
                .sum();
            (acc * cell).sqrt()
        })
        .sum()
}

fn weighted_lp(s: &Spectrum, m: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("exponent p = {p} must be ≥ 1")));
    }
    let d = s.grid().axes().len();
    let mut z = [0.0; 4];
    let mut acc = 0.0f64;
    for (i, c) in s.values().iter().enumerate() {
        s.grid().frequency(i, &mut z[..d]);
        let r = z[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        let a = c.norm();
        let v = if m == 0.0 {
            a
        } else if r == 0.0 {
            if m < 0.0 && a > 0.0 {
                return Err(Error::Domain(format!(
                    "weight |Z|^{m} is singular at Z = 0"
                )));
            }
            0.0
        } else {
            r.powf(m) * a
        };
        if p.is_infinite() {
            acc = acc.max(v);
        } else {
            acc += v.powf(p);
        }
    }
    Ok(if p.is_infinite() {
        acc
    } else {
        (acc * s.cell_volume()).powf(1.0 / p)
    })
}

/// Growth rate `D(m,n)` of the `Hᵐ` norms: `nπ·max{1, ‖V̂|S|²‖}` for `m = 1`,
/// otherwise `(1 + n^{m+1} m!)π·max{1, ‖V̂(|S| + |S|^{m+1})‖}`.
pub fn growth_constant(m: u32, n: usize, pot: &FourierPotential) -> Result<Moment> {
    if m == 0 {
        return Err(Error::Domain("growth constant needs m ≥ 1".into()));
    }
    if pot.is_zero() {
        let scale = if m == 1 {
            n as f64
        } else {
            1.0 + (n as f64).powi(m as i32 + 1) * factorial(m)
        };
        return Ok(Moment::Finite(scale * PI));
    }
    let (scale, moment) = if m == 1 {
        (n as f64, pot.abs_moment(|s| s * s)?)
    } else {
        let p = m as i32 + 1;
        (
            1.0 + (n as f64).powi(p) * factorial(m),
            pot.abs_moment(|s| s + s.powi(p))?,
        )
    };
    Ok(Moment::from_value(scale * PI * moment.max(1.0)))
}

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

/// `norm(a − b) / norm(normalizer)`.
pub fn relative_error(
    a: &PhaseSpaceField,
    b: &PhaseSpaceField,
    kind: NormKind,
    normalizer: &PhaseSpaceField,
) -> Result<f64> {
    let den = norm(normalizer, kind)?;
    if den < 1e-300 {
        return Err(Error::DegenerateNormalizer(den));
    }
    Ok(norm(&a.sub(b)?, kind)? / den)
}

/// Convolution in position, `∫ f(s) g(x − s, k) ds`, for `n = 1`. `f` is
/// sampled at `s_j = (j − len/2)h` with `h` the position spacing of `g`.
pub fn convolve_position(f: &[f64], g: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let grid = g.grid();
    if grid.n() != 1 {
        return Err(Error::Unsupported(
            "position convolution is implemented for n = 1".into(),
        ));
    }
    let ax = grid.axes()[0];
    if f.is_empty() || f.len() > ax.len {
        return Err(Error::Data(format!(
            "kernel length {} must be in 1..={}",
            f.len(),
            ax.len
        )));
    }
    let h = ax.spacing();
    let half = (f.len() / 2) as f64;
    let fhat: Vec<num_complex::Complex64> = (0..ax.len)
        .map(|m| {
            let xf = ax.frequency(m);
            f.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let (sn, cs) = (-2.0 * PI * xf * (j as f64 - half) * h).sin_cos();
                    num_complex::Complex64::new(cs, sn) * (v * h)
                })
                .sum()
        })
        .collect();
    let mut s = g.spectrum()?;
    let nk = grid.axes()[1].len;
    for (i, v) in s.values_mut().iter_mut().enumerate() {
        *v *= fhat[i / nk];
    }
    crate::field::spectral_inverse(&s)
}

/// Both sides of the position-convolution Young inequality:
/// `lhs = norm(f ∗ g)`, `rhs = ‖f‖_{L¹}·norm(g)`, with `Σ_{l≤m} ‖f|s|ˡ‖_{L¹}`
/// replacing `‖f‖_{L¹}` for positive Sobolev orders.
pub fn young_convolution_check(
    f: &[f64],
    g: &PhaseSpaceField,
    kind: NormKind,
) -> Result<(f64, f64)> {
    let conv = convolve_position(f, g)?;
    let h = g.grid().axes()[0].spacing();
    let half = (f.len() / 2) as f64;
    let moment = |l: i32| -> f64 {
        f.iter()
            .enumerate()
            .map(|(j, v)| v.abs() * ((j as f64 - half) * h).abs().powi(l))
            .sum::<f64>()
            * h
    };
    let factor = match kind {
        NormKind::Sobolev(m) if m > 0 => (0..=m).map(moment).sum(),
        _ => moment(0),
    };
    Ok((norm(&conv, kind)?, factor * norm(g, kind)?))
}

/// `(ln Γ((m−1−θ)/2), ln[(2π)^{1/4} 2^{(3+2θ)/4} √(m!/(2ᵐ m(m−1)))])`.
pub fn gamma_inequality_check(m: u32, theta: f64) -> Result<(f64, f64)> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::Domain(format!("decay exponent {theta} must be ≥ 0")));
    }
    if (m as f64) < theta.ceil() + 3.0 {
        return Err(Error::Domain(format!("order {m} must be at least ⌈θ⌉ + 3")));
    }
    let mf = m as f64;
    let lhs = libm::lgamma((mf - 1.0 - theta) / 2.0);
    let ln_fact = libm::lgamma(mf + 1.0);
    let rhs = 0.25 * (2.0 * PI).ln()
        + (3.0 + 2.0 * theta) / 4.0 * core::f64::consts::LN_2
        + 0.5 * (ln_fact - mf * core::f64::consts::LN_2 - mf.ln() - (mf - 1.0).ln());
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::PhaseSpaceGaussian;
    use crate::GridSpec;

    fn unit_gaussian(g: &GridSpec) -> PhaseSpaceField {
        PhaseSpaceGaussian::mixed(&[0.0, 0.0], &[1.0, 1.0])
            .unwrap()
            .sample(g)
            .unwrap()
    }

    #[test]
    fn gaussian_l2_norm() {
        let w = unit_gaussian(&GridSpec::default_1d(128).unwrap());
        let expected = (4.0 * PI).powf(-0.5);
        assert!((norm(&w, NormKind::L2).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.28209).abs() < 1e-5);
    }

    #[test]
    fn order_zero_agreements() {
        let w = PhaseSpaceGaussian::mixed(&[0.5, -1.0], &[0.7, 1.3])
            .unwrap()
            .sample(&GridSpec::default_1d(128).unwrap())
            .unwrap();
        let l2 = norm(&w, NormKind::L2).unwrap();
        assert!((norm(&w, NormKind::Sobolev(0)).unwrap() - l2).abs() < 1e-12 * l2);
        assert!((norm(&w, NormKind::Xmp { m: 0.0, p: 2.0 }).unwrap() - l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn gaussian_h1_closed_form() {
        // ‖∂ₓW‖ = ‖∂ₖW‖ = (8π)^{-1/2} for the unit Gaussian
        let w = unit_gaussian(&GridSpec::default_1d(256).unwrap());
        let expected = (4.0 * PI).powf(-0.5) + 2.0 * (8.0 * PI).powf(-0.5);
        assert!((norm(&w, NormKind::Sobolev(1)).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 1).len(), 3);
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(4, 2).len(), 15);
    }

    #[test]
    fn homogeneous() {
        let w = unit_gaussian(&GridSpec::default_1d(64).unwrap());
        for kind in [
            NormKind::L2,
            NormKind::Sobolev(2),
            NormKind::Sobolev(-1),
            NormKind::Xmp {
                m: 1.5,
                p: f64::INFINITY,
            },
        ] {
            let a = norm(&w, kind).unwrap();
            let b = norm(&w.scaled(-3.0), kind).unwrap();
            assert!((b - 3.0 * a).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn growth_constants() {
        let v = |m, pot: &FourierPotential| growth_constant(m, 1, pot).unwrap().value().unwrap();
        assert!((v(1, &FourierPotential::zero(1)) - PI).abs() < 1e-15);
        let cos = FourierPotential::cosine(1.0, 1.0);
        assert!((v(1, &cos) - PI).abs() < 1e-12);
        assert!((v(2, &cos) - 6.0 * PI).abs() < 1e-12);
        assert!(
            (growth_constant(1, 2, &FourierPotential::zero(2))
                .unwrap()
                .value()
                .unwrap()
                - 2.0 * PI)
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn relative_error_cases() {
        let g = GridSpec::default_1d(64).unwrap();
        let w = unit_gaussian(&g);
        let zero = PhaseSpaceField::zeros(g);
        assert_eq!(relative_error(&w, &w, NormKind::L2, &w).unwrap(), 0.0);
        assert!(
            (relative_error(&w, &zero, NormKind::Sobolev(-2), &w).unwrap() - 1.0).abs() < 1e-14
        );
        assert!(matches!(
            relative_error(&w, &w, NormKind::L2, &zero),
            Err(Error::DegenerateNormalizer(_))
        ));
    }

    #[test]
    fn young_identity_and_box() {
        let g = GridSpec::default_1d(128).unwrap();
        let w = PhaseSpaceGaussian::mixed(&[0.3, 0.0], &[0.8, 1.0])
            .unwrap()
            .sample(&g)
            .unwrap();
        let h = g.axes()[0].spacing();
        let mut delta = vec![0.0; 9];
        delta[4] = 1.0 / h;
        let (lhs, rhs) = young_convolution_check(&delta, &w, NormKind::L2).unwrap();
        assert!((lhs - w.l2_norm()).abs() < 1e-12 && (rhs - w.l2_norm()).abs() < 1e-12);
        let boxed = vec![2.0 / (9.0 * h); 9];
        for kind in [NormKind::L2, NormKind::Sobolev(-1), NormKind::Sobolev(2)] {
            let (lhs, rhs) = young_convolution_check(&boxed, &w, kind).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-10), "{kind:?}");
        }
        let (_, rhs) = young_convolution_check(&boxed, &w, NormKind::L2).unwrap();
        assert!((rhs - 2.0 * w.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn gamma_inequality() {
        for (m, theta) in [(10, 1.5), (50, 2.5)] {
            let (l, r) = gamma_inequality_check(m, theta).unwrap();
            assert!(l < r);
        }
        // Γ(3.75) = 4.4229884533...
        let (l, _) = gamma_inequality_check(10, 1.5).unwrap();
        assert!((l.exp() - 4.422_988_410_460_251).abs() < 1e-8);
        let mut last = f64::NEG_INFINITY;
        for m in 10..=50 {
            let (l, r) = gamma_inequality_check(m, 1.5).unwrap();
            assert!(r - l >= last);
            last = r - l;
        }
        assert!(gamma_inequality_check(4, 1.5).is_err());
    }

    fn spike(nodes: usize) -> PhaseSpaceField {
        let g = GridSpec::new(1, (-1.0, 1.0), nodes, (-1.0, 1.0), nodes).unwrap();
        let mut v = vec![0.0; g.len()];
        v[(nodes / 2) * nodes + nodes / 2] = 1.0 / g.cell_volume();
        PhaseSpaceField::new(g, v).unwrap()
    }

    #[test]
    fn delta_spike_refinement() {
        let sizes = [64, 128, 256, 512];
        let series = |m: i32| -> Vec<f64> {
            sizes
                .iter()
                .map(|&n| norm(&spike(n), NormKind::Sobolev(-m)).unwrap())
                .collect()
        };
        // phase space has dimension 2: L² doubles per refinement, order 1 grows
        // like √ln N, order 2 converges
        let l2 = series(0);
        let h1 = series(1);
        let h2 = series(2);
        for i in 1..sizes.len() {
            assert!((l2[i] / l2[i - 1] - 2.0).abs() < 1e-9);
            let d1 = h1[i] * h1[i] - h1[i - 1] * h1[i - 1];
            assert!(
                (d1 - 2.0 * PI * core::f64::consts::LN_2).abs() < 0.05,
                "{d1}"
            );
        }
        for i in 2..sizes.len() {
            assert!(h2[i] - h2[i - 1] < (h2[i - 1] - h2[i - 2]) / 3.0);
        }
        assert!((h2[3] - PI.sqrt()).abs() < 1e-2);
    }
}
