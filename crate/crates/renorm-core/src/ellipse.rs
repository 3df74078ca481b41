//! Rigorous suprema over Bernstein ellipse boundaries.
//!
//! Two routes are provided. For a polynomial given by its Chebyshev
//! coefficients, `sup_ellipse` bounds the supremum of |h| over the boundary
//! of E_rho by evaluating the associated trigonometric polynomial on a
//! uniform angle grid with tilted (interval) rotation factors. For
//! compositions only available through evaluation closures,
//! `adaptive_boundary_sup` bisects the boundary angle until each piece's
//! enclosure is tight or a depth cap is reached; the returned bound is valid
//! either way.

use crate::cheb::{ChebSeries, Parity};
use crate::error::{Error, Result};
use crate::scalar::{ComplexBox, Scalar};
use rug::Float;

/// Enclosure of the boundary point of E_rho at angle theta:
/// (cos(theta) (rho + 1/rho)/2, sin(theta) (rho - 1/rho)/2).
pub fn circle_point(theta: &Scalar, rho: &Scalar) -> Result<ComplexBox> {
    if rho.lo() < &1 {
        return Err(Error::InvalidParam("circle_point needs rho >= 1".into()));
    }
    let inv = rho.recip()?;
    let semi_major = rho.add(&inv).mul_2exp(-1);
    let semi_minor = rho.sub(&inv).mul_2exp(-1);
    Ok(ComplexBox::new(
        theta.cos().mul(&semi_major),
        theta.sin().mul(&semi_minor),
    ))
}

/// Outcome of a boundary supremum computation. `upper` always bounds the
/// true supremum from above; `lower` bounds it from below; `warn` is set
/// when the subdivision depth cap was reached before the tolerance.
#[derive(Clone, Debug)]
pub struct SupBound {
    pub upper: Float,
    pub lower: Float,
    pub warn: bool,
}

/// Angular range to scan, exploiting symmetries of the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// Real coefficients: |f(conj z)| = |f(z)|, scan [0, pi].
    Half,
    /// Real and even: additionally |f(-z)| = |f(z)|, scan [0, pi/2].
    Quarter,
    /// No symmetry assumed: scan [0, 2 pi].
    Full,
}

impl Symmetry {
    fn range_factor(self) -> (i64, i64) {
        match self {
            Symmetry::Half => (1, 1),
            Symmetry::Quarter => (1, 2),
            Symmetry::Full => (2, 1),
        }
    }
}

pub const DEFAULT_DEPTH_CAP: u32 = 40;

/// Adaptive supremum of a real-valued enclosure functional over theta in
/// the symmetry range. `eval` receives an enclosure of the angle interval
/// and must return an enclosure of {g(theta)} over it.
pub fn adaptive_sup_theta(
    prec: u32,
    symmetry: Symmetry,
    rel_tol: f64,
    depth_cap: u32,
    piece_budget: usize,
    eval: &dyn Fn(&Scalar) -> Result<Scalar>,
) -> Result<SupBound> {
    let pi = Scalar::pi(prec);
    let (num, den) = symmetry.range_factor();
    let hi = pi.mul(&Scalar::from_ratio(num, den, prec));
    adaptive_sup(prec, &Scalar::zero(prec), &hi, rel_tol, depth_cap, piece_budget, eval)
}

/// Adaptive supremum of g over [lo, hi] by interval bisection.
pub fn adaptive_sup(
    prec: u32,
    lo: &Scalar,
    hi: &Scalar,
    rel_tol: f64,
    depth_cap: u32,
    piece_budget: usize,
    eval: &dyn Fn(&Scalar) -> Result<Scalar>,
) -> Result<SupBound> {
    let mut processed = 0usize;
    let mut best_lower = Float::with_val(prec, f64::NEG_INFINITY);
    // coarse seed for pruning
    let seeds = 16u32;
    for i in 0..=seeds {
        let t = lo.add(
            &hi.sub(lo)
                .mul(&Scalar::from_ratio(i as i64, seeds as i64, prec)),
        );
        let t_point = Scalar::point(t.mid());
        if let Ok(v) = eval(&t_point) {
            if *v.lo() > best_lower {
                best_lower = v.lo().clone();
            }
        }
    }
    let mut warn = false;
    let mut upper = Float::with_val(prec, f64::NEG_INFINITY);
    let mut stack: Vec<(Scalar, Scalar, u32)> = vec![(lo.clone(), hi.clone(), 0)];
    while let Some((a, b, depth)) = stack.pop() {
        let piece = a.hull(&b);
        let v = match eval(&piece) {
            Ok(v) => v,
            // a wide box can leave the closure's validity domain even when
            // its refinements do not; subdivide before giving up
            Err(e) => {
                if depth >= depth_cap {
                    return Err(e);
                }
                let mid = Scalar::point(a.add(&b).mul_2exp(-1).mid());
                stack.push((a, mid.clone(), depth + 1));
                stack.push((mid, b, depth + 1));
                continue;
            }
        };
        if *v.lo() > best_lower {
            best_lower = v.lo().clone();
        }
        if *v.hi() <= best_lower {
            // cannot contain the maximizer beyond what we already guarantee
            if *v.hi() > upper {
                upper = v.hi().clone();
            }
            continue;
        }
        processed += 1;
        let width = v.width_upper();
        let scale = best_lower.clone().abs().max(&Float::with_val(prec, 1e-300));
        let tight = width <= Float::with_val(prec, rel_tol) * scale;
        let exhausted = depth >= depth_cap || processed >= piece_budget;
        if tight || exhausted {
            if exhausted && !tight {
                warn = true;
            }
            if *v.hi() > upper {
                upper = v.hi().clone();
            }
            continue;
        }
        let mid = Scalar::point(a.add(&b).mul_2exp(-1).mid());
        stack.push((a, mid.clone(), depth + 1));
        stack.push((mid, b, depth + 1));
    }
    Ok(SupBound {
        upper,
        lower: best_lower,
        warn,
    })
}

/// Upper bound for sup over the boundary of E_rho of |g(z)| where g is the
/// composition of the given closures (applied left to right to the boundary
/// enclosure).
pub fn sup_composed(
    fns: &[&dyn Fn(&ComplexBox) -> Result<ComplexBox>],
    rho: &Scalar,
    symmetry: Symmetry,
    rel_tol: f64,
    depth_cap: u32,
    piece_budget: usize,
) -> Result<SupBound> {
    let prec = rho.prec();
    let rho = rho.clone();
    adaptive_sup_theta(prec, symmetry, rel_tol, depth_cap, piece_budget, &move |theta| {
        let mut z = circle_point(theta, &rho)?;
        for f in fns {
            z = f(&z)?;
        }
        Ok(z.abs_iv())
    })
}

/// eta = sup over the boundary of E_nu of |psi(z) - 1| + |psi(z) + 1|, and
/// from it the radius rho with psi(E_nu) inside E_rho,
/// rho = (eta + sqrt(eta^2 - 4))/2. Returns (rho, warn).
pub fn image_radius(
    psi: &dyn Fn(&ComplexBox) -> Result<ComplexBox>,
    nu: &Scalar,
    symmetry: Symmetry,
    rel_tol: f64,
    depth_cap: u32,
    piece_budget: usize,
) -> Result<(Scalar, bool)> {
    let prec = nu.prec();
    let one = Scalar::one(prec);
    let nu_c = nu.clone();
    let sup = adaptive_sup_theta(prec, symmetry, rel_tol, depth_cap, piece_budget, &move |theta| {
        let z = circle_point(theta, &nu_c)?;
        let w = psi(&z)?;
        let d1 = w.sub(&ComplexBox::from_real(one.clone())).abs_iv();
        let d2 = w.add_real(&one).abs_iv();
        Ok(d1.add(&d2))
    })?;
    // eta >= 2 always holds for the exact quantity; clamp rounding noise
    let two = Float::with_val(prec, 2);
    let eta_up = if sup.upper < two { two.clone() } else { sup.upper.clone() };
    let eta = Scalar::point(eta_up);
    let disc = eta.square().sub(&Scalar::from_i(4, prec)).sqrt_clamped();
    let rho = eta.add(&disc).mul_2exp(-1);
    // upper endpoint is the certified radius
    Ok((Scalar::point(rho.hi().clone()), sup.warn))
}

/// Table of cos(pi r / denom) enclosures with range queries. Exploits the
/// period-2 and reflection symmetries so only r in [0, denom/2] is stored.
struct TrigTable {
    denom: i64,
    quarter: Vec<Scalar>, // cos(pi r / denom), r = 0..=denom/2 (denom even)
    prec: u32,
}

impl TrigTable {
    fn new(denom: i64, prec: u32) -> Self {
        assert!(denom >= 2 && denom % 2 == 0);
        let pi = Scalar::pi(prec);
        let quarter = (0..=denom / 2)
            .map(|r| pi.mul(&Scalar::from_ratio(r, denom, prec)).cos())
            .collect();
        TrigTable {
            denom,
            quarter,
            prec,
        }
    }

    /// Enclosure of cos(pi r / denom).
    fn cos_point(&self, r: i64) -> Scalar {
        let d = self.denom;
        let mut m = r.rem_euclid(2 * d); // angle in [0, 2 pi)
        if m > d {
            m = 2 * d - m; // cos(2 pi - x) = cos(x)
        }
        if m > d / 2 {
            self.quarter[(d - m) as usize].neg() // cos(pi - x) = -cos(x)
        } else {
            self.quarter[m as usize].clone()
        }
    }

    /// Enclosure of {cos(pi r / denom) : r in [r_lo, r_hi]}.
    fn cos_range(&self, r_lo: i64, r_hi: i64) -> Scalar {
        debug_assert!(r_lo <= r_hi);
        let d = self.denom;
        if r_hi - r_lo >= 2 * d {
            return Scalar::from_i(-1, self.prec).hull(&Scalar::from_i(1, self.prec));
        }
        let mut out = self.cos_point(r_lo).hull(&self.cos_point(r_hi));
        // interior extrema at angle multiples of pi: r = m d
        let m_lo = r_lo.div_euclid(d) + i64::from(r_lo.rem_euclid(d) != 0);
        let m_hi = r_hi.div_euclid(d);
        for m in m_lo..=m_hi {
            let v = if m.rem_euclid(2) == 0 { 1 } else { -1 };
            out = out.hull(&Scalar::from_i(v, self.prec));
        }
        out
    }

    /// Enclosure of {sin(pi r / denom) : r in [r_lo, r_hi]}
    /// via sin(x) = cos(x - pi/2); denom must be divisible by 2.
    fn sin_range(&self, r_lo: i64, r_hi: i64) -> Scalar {
        self.cos_range(r_lo - self.denom / 2, r_hi - self.denom / 2)
    }
}

/// Parameters for the grid-based polynomial supremum.
#[derive(Clone, Debug)]
pub struct SupEllipseParams {
    pub initial_grid: usize,
    pub max_doublings: u32,
    pub slack: f64,
}

impl Default for SupEllipseParams {
    fn default() -> Self {
        SupEllipseParams {
            initial_grid: 1 << 10,
            max_doublings: 4,
            slack: 1.05,
        }
    }
}

/// Upper bound for the C^0 norm of a real-coefficient polynomial over E_rho,
/// via its trigonometric form on the boundary. For rho = 1 falls back to
/// subdivided evaluation over [-1, 1].
pub fn sup_ellipse(h: &ChebSeries, rho: &Scalar) -> Result<Float> {
    sup_ellipse_with(h, rho, &SupEllipseParams::default())
}

pub fn sup_ellipse_with(h: &ChebSeries, rho: &Scalar, params: &SupEllipseParams) -> Result<Float> {
    if rho.lo() < &1 {
        return Err(Error::InvalidParam("sup_ellipse needs rho >= 1".into()));
    }
    let prec = h.prec().max(rho.prec());
    if rho.is_point() && *rho.lo() == 1 {
        let hh = h.clone();
        let b = adaptive_sup(
            prec,
            &Scalar::zero(prec),
            &Scalar::one(prec),
            1e-3,
            DEFAULT_DEPTH_CAP,
            1 << 16,
            &move |x| Ok(hh.eval_s(x).abs()),
        )?;
        // even or general with real coefficients: |h| on [-1,1] equals its
        // sup on [0,1] only for even h; otherwise scan [-1,1]
        if h.parity() == Parity::Even {
            return Ok(b.upper);
        }
        let hh = h.clone();
        let b2 = adaptive_sup(
            prec,
            &Scalar::from_i(-1, prec),
            &Scalar::zero(prec),
            1e-3,
            DEFAULT_DEPTH_CAP,
            1 << 16,
            &move |x| Ok(hh.eval_s(x).abs()),
        )?;
        return Ok(b.upper.max(&b2.upper));
    }

    let g = h.to_general();
    let deg = g.degree();
    // trig coefficients: a_k = h_k rho^k, b_k = h_k rho^{-k}
    let inv_rho = rho.recip()?;
    let mut a = Vec::with_capacity(deg + 1);
    let mut b = Vec::with_capacity(deg + 1);
    let mut pw = Scalar::one(prec);
    let mut ipw = Scalar::one(prec);
    for k in 0..=deg {
        if k > 0 {
            pw = pw.mul(rho);
            ipw = ipw.mul(&inv_rho);
        }
        a.push(g.coeffs()[k].mul(&pw));
        b.push(g.coeffs()[k].mul(&ipw));
    }

    let symmetry = match h.parity() {
        Parity::Even => Symmetry::Quarter,
        Parity::General => Symmetry::Half,
    };
    let (range_num, range_den) = symmetry.range_factor();

    let mut n = params.initial_grid.max(2 * deg + 2);
    let mut best: Option<Float> = None;
    for round in 0..=params.max_doublings {
        let pi = Scalar::pi(prec);
        // grid over [0, range]: theta_j = j*range/n, half-width range/(2n);
        // all angles are pi * r / denom for integers r
        let denom = 2 * n as i64 * range_den;
        let table = TrigTable::new(denom, prec);
        let mut upper = Float::with_val(prec, f64::NEG_INFINITY);
        let mut lower = Float::with_val(prec, f64::NEG_INFINITY);
        let delta = pi
            .mul(&Scalar::from_ratio(range_num, denom, prec))
            .mag_upper();

        // f(theta) = a_0 + sum (a_k+b_k) cos(k theta) + i (a_k-b_k) sin(k theta)
        // f'(theta) = sum -k (a_k+b_k) sin(k theta) + i k (a_k-b_k) cos(k theta)
        let eval = |r_lo: i64, r_hi: i64, with_deriv: bool| {
            let mut re = a[0].clone();
            let mut im = Scalar::zero(prec);
            let mut dre = Scalar::zero(prec);
            let mut dim = Scalar::zero(prec);
            for k in 1..=deg {
                let ck = table.cos_range(k as i64 * r_lo, k as i64 * r_hi);
                let sk = table.sin_range(k as i64 * r_lo, k as i64 * r_hi);
                let sum = a[k].add(&b[k]);
                let dif = a[k].sub(&b[k]);
                re = re.add(&sum.mul(&ck));
                im = im.add(&dif.mul(&sk));
                if with_deriv {
                    let kf = Scalar::from_u(k as u64, prec);
                    dre = dre.sub(&kf.mul(&sum).mul(&sk));
                    dim = dim.add(&kf.mul(&dif).mul(&ck));
                }
            }
            (ComplexBox::new(re, im), ComplexBox::new(dre, dim))
        };

        for j in 0..=n {
            // center at r = 2 j range_num, piece edges at (2j -+ 1) range_num
            let r_c = 2 * j as i64 * range_num;
            let r_lo = (2 * j as i64 - 1).max(0) * range_num;
            let r_hi = (2 * j as i64 + 1).min(2 * n as i64) * range_num;

            let (fc, _) = eval(r_c, r_c, false);
            let v_center = fc.abs_iv();
            let (fp, dp) = eval(r_lo, r_hi, true);
            // mean value: |f(t)| <= |f(c)| + delta * sup |Re(conj f f')| / |f|
            // over the piece, valid when the piece box excludes zero
            let cand = if *fp.abs_iv().lo() > 0 {
                let num = fp.re.mul(&dp.re).add(&fp.im.mul(&dp.im));
                let slope = num.mag_upper() / fp.mag_lower();
                let mut u = v_center.hi().clone();
                u += delta.clone() * slope;
                let box_u = fp.mag_upper();
                if box_u < u {
                    box_u
                } else {
                    u
                }
            } else {
                fp.mag_upper()
            };
            if cand > upper {
                upper = cand;
            }
            if *v_center.lo() > lower {
                lower = v_center.lo().clone();
            }
        }
        best = Some(match best {
            Some(prev) => prev.min(&upper),
            None => upper.clone(),
        });
        if lower > 0 {
            let ratio = upper.clone() / &lower;
            if ratio.to_f64() < params.slack {
                break;
            }
        }
        if round < params.max_doublings {
            n *= 2;
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::SplitMix64;

    const P: u32 = 128;

    #[test]
    fn circle_point_examples() {
        // theta=0, rho=2 -> (1.25, 0)
        let z = circle_point(&Scalar::zero(P), &Scalar::from_i(2, P)).unwrap();
        assert!(z.re.contains_f(&Float::with_val(P, 1.25)));
        assert!(z.im.contains_zero());
        // theta=pi/2, rho=1 -> (0, 0)
        let z = circle_point(&Scalar::pi(P).mul_2exp(-1), &Scalar::one(P)).unwrap();
        assert!(z.re.contains_zero());
        assert!(z.im.contains_zero());
        // theta over the full circle, rho=2: re covers [-1.25, 1.25]
        let theta = Scalar::zero(P).hull(&Scalar::pi(P).mul_2exp(1));
        let z = circle_point(&theta, &Scalar::from_i(2, P)).unwrap();
        assert!(z.re.contains_f(&Float::with_val(P, 1.25)));
        assert!(z.re.contains_f(&Float::with_val(P, -1.25)));
    }

    #[test]
    fn sup_ellipse_tk_norm() {
        // ||T_k|| on E_2 = (2^k + 2^-k)/2
        let tight = SupEllipseParams {
            initial_grid: 1 << 10,
            max_doublings: 8,
            slack: 1.0 + 1e-7,
        };
        for k in [0usize, 2, 4, 8] {
            let h = ChebSeries::basis(k, Parity::Even, P, Scalar::from_i(2, P));
            let bound = sup_ellipse_with(&h, &Scalar::from_i(2, P), &tight).unwrap();
            let exact = (2f64.powi(k as i32) + 2f64.powi(-(k as i32))) / 2.0;
            let b = bound.to_f64();
            assert!(b >= exact * (1.0 - 1e-12), "k={k}: {b} < {exact}");
            assert!(b <= exact * (1.0 + 1e-6), "k={k}: {b} too loose vs {exact}");
        }
        // general parity T_3
        let h = ChebSeries::basis(3, Parity::General, P, Scalar::from_i(2, P));
        let bound = sup_ellipse_with(&h, &Scalar::from_i(2, P), &tight)
            .unwrap()
            .to_f64();
        let exact = (8.0 + 0.125) / 2.0;
        assert!(bound >= exact * (1.0 - 1e-12) && bound <= exact * (1.0 + 1e-6));
    }

    #[test]
    fn sup_ellipse_dominates_samples() {
        let mut rng = SplitMix64::new(31337);
        let rho = Scalar::from_i(2, P);
        let coeffs: Vec<Scalar> = (0..20)
            .map(|_| Scalar::from_ratio(rng.next_u64() as i64 % 201 - 100, 128, P))
            .collect();
        let h = ChebSeries::new(coeffs, Parity::Even, rho.clone());
        let params = SupEllipseParams {
            initial_grid: 1 << 14,
            max_doublings: 0,
            slack: 1.0,
        };
        let bound = sup_ellipse_with(&h, &rho, &params).unwrap();
        // dense boundary sampling oracle
        let mut max_sample = Float::with_val(P, 0);
        let samples = 10_000u32;
        for i in 0..samples {
            let theta = Scalar::pi(P)
                .mul(&Scalar::from_ratio(2 * i as i64, samples as i64, P));
            let z = circle_point(&Scalar::point(theta.mid()), &rho).unwrap();
            let v = h.eval_c(&z).abs_iv();
            if *v.lo() > max_sample {
                max_sample = v.lo().clone();
            }
        }
        assert!(bound >= max_sample);
        assert!(bound.to_f64() <= max_sample.to_f64() * 1.01 + 1e-12);
    }

    #[test]
    fn composed_identity_and_constant() {
        // identity on E_2: sup |z| = 1.25 within 1%
        let ident: &dyn Fn(&ComplexBox) -> Result<ComplexBox> = &|z| Ok(z.clone());
        let b = sup_composed(&[ident], &Scalar::from_i(2, P), Symmetry::Half, 1e-3, 40, 100_000).unwrap();
        let u = b.upper.to_f64();
        assert!((1.25..1.2626).contains(&u), "{u}");
        // constant 1
        let one: &dyn Fn(&ComplexBox) -> Result<ComplexBox> =
            &|z| Ok(ComplexBox::from_real(Scalar::one(z.prec())));
        let b = sup_composed(&[one], &Scalar::from_i(2, P), Symmetry::Half, 1e-3, 40, 100_000).unwrap();
        assert!((b.upper.to_f64() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn image_radius_identity_and_constant() {
        // identity: eta = nu + 1/nu, rho = nu
        let ident: &dyn Fn(&ComplexBox) -> Result<ComplexBox> = &|z| Ok(z.clone());
        let (rho, warn) =
            image_radius(ident, &Scalar::from_i(2, P), Symmetry::Half, 1e-4, 40, 100_000).unwrap();
        assert!(!warn);
        let r = rho.hi().to_f64();
        assert!((2.0..2.02).contains(&r), "{r}");
        // constant 0: eta = 2, rho = 1
        let zero: &dyn Fn(&ComplexBox) -> Result<ComplexBox> =
            &|z| Ok(ComplexBox::from_real(Scalar::zero(z.prec())));
        let (rho, _) = image_radius(zero, &Scalar::from_i(2, P), Symmetry::Half, 1e-4, 40, 100_000).unwrap();
        let r = rho.hi().to_f64();
        assert!((1.0..1.001).contains(&r), "{r}");
    }
}
