//! Non-rigorous numerical pipeline: seeding from the standard polynomial
//! families, Newton iteration for approximate fixed points of the
//! renormalization zero map, and the approximate dominant eigenpair of the
//! linearized operator. Everything here works at midpoint precision; the
//! validator is responsible for rigor.

use crate::cheb::{ChebSeries, DctPlan, Parity};
use crate::error::{Error, Result};
use crate::linalg::{space_weights, FMat};
use crate::operator::{
    build_dr_data, df_matrix, dphi_matrix, phi_values, CandidatePair, ChainCtx, RenormProblem,
};
use crate::scalar::Scalar;
use rug::ops::Pow;
use rug::Float;

/// Seed configuration: start Newton from q_{d,mu}(x) = 1 - mu x^d.
#[derive(Clone, Debug)]
pub struct SeedSpec {
    pub m: u32,
    pub d: u32,
    pub mu: f64,
    pub k: usize,
    pub prec: u32,
}

/// Orbit of 0 under q_{d,mu} in f64: returns c_1..c_n (c_1 = 1).
fn orbit(d: u32, mu: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut x = 0.0f64;
    for _ in 0..n {
        x = 1.0 - mu * x.powi(d as i32);
        out.push(x);
        if !x.is_finite() || x.abs() > 1e6 {
            break;
        }
    }
    out
}

fn c_m(d: u32, mu: f64, m: usize) -> f64 {
    let mut x = 0.0f64;
    for _ in 0..m {
        x = 1.0 - mu * x.powi(d as i32);
        if !x.is_finite() || x.abs() > 1e6 {
            return f64::NAN;
        }
    }
    x
}

/// Superstable parameters of exact period m for the family q_{d,mu}:
/// roots of q^m(0) = 0 whose orbit has no earlier return to 0.
pub fn superstable_params(d: u32, m: u32, mu_lo: f64, mu_hi: f64) -> Vec<f64> {
    let m = m as usize;
    let steps = 2_000_000usize;
    let h = (mu_hi - mu_lo) / steps as f64;
    let mut out = Vec::new();
    let mut prev = c_m(d, mu_lo, m);
    for i in 1..=steps {
        let mu = mu_lo + i as f64 * h;
        let cur = c_m(d, mu, m);
        if cur == 0.0 {
            let orb = orbit(d, mu, m - 1);
            let min_abs = orb
                .iter()
                .take(m - 1)
                .fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
            if min_abs > 1e-6 {
                out.push(mu);
            }
            prev = cur;
            continue;
        }
        if prev.is_finite() && cur.is_finite() && prev * cur < 0.0 {
            // bisect
            let (mut a, mut b) = (mu - h, mu);
            let mut fa = prev;
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let fm = c_m(d, mid, m);
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            let root = 0.5 * (a + b);
            // exact period check: no earlier zero in the orbit
            let orb = orbit(d, root, m - 1);
            let min_abs = orb
                .iter()
                .take(m - 1)
                .fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
            if min_abs > 1e-6 {
                out.push(root);
            }
        }
        prev = cur;
    }
    out
}

/// Self-similarity parameters within each superstable window: roots of
/// G(mu) = q^{m^2}(0)/q^m(0) - q^m(0), the natural Newton seeds for the
/// order-m fixed points. Returns candidate mu values sorted ascending.
pub fn seed_params(d: u32, m: u32) -> Vec<f64> {
    let mu_hi = 2.05;
    let ss = superstable_params(d, m, 0.3, mu_hi);
    let g = |mu: f64| -> f64 {
        let cm = c_m(d, mu, m as usize);
        let cm2 = c_m(d, mu, (m * m) as usize);
        if !cm.is_finite() || !cm2.is_finite() || cm.abs() < 1e-12 {
            return f64::NAN;
        }
        cm2 / cm - cm
    };
    let mut out = Vec::new();
    for (w, &mu_ss) in ss.iter().enumerate() {
        // scan from just past the superstable point to the next window (or
        // the family end), collecting the sign changes of G
        let scan_end = ss.get(w + 1).copied().unwrap_or(mu_hi).min(mu_ss + 0.5);
        let steps = 4000;
        let h = (scan_end - mu_ss) / steps as f64;
        if h <= 0.0 {
            continue;
        }
        let mut prev = f64::NAN;
        for i in 1..steps {
            let mu = mu_ss + i as f64 * h;
            let cur = g(mu);
            if prev.is_finite() && cur.is_finite() && prev * cur < 0.0 {
                let (mut a, mut b) = (mu - h, mu);
                let mut fa = prev;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let fm = g(mid);
                    if !fm.is_finite() {
                        break;
                    }
                    if fa * fm <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
                out.push(0.5 * (a + b));
            }
            prev = cur;
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Chebyshev coefficients (even storage) of 1 - mu x^d for d in {2, 4}.
pub fn seed(spec: &SeedSpec) -> Result<CandidatePair> {
    let prec = spec.prec;
    let mu = Scalar::from_f64(spec.mu, prec);
    let rho = Scalar::from_i(2, prec);
    let mut coeffs = vec![Scalar::zero(prec); spec.k + 1];
    match spec.d {
        2 => {
            // x^2 = (T_0 + T_2)/2: h_0 = 1 - mu/2, h_2 = -mu/4
            coeffs[0] = Scalar::one(prec).sub(&mu.mul_2exp(-1));
            coeffs[1] = mu.mul_2exp(-2).neg();
        }
        4 => {
            // x^4 = (3 T_0 + 4 T_2 + T_4)/8
            coeffs[0] = Scalar::one(prec).sub(&mu.mul(&Scalar::from_ratio(3, 8, prec)));
            coeffs[1] = mu.mul_2exp(-2).neg();
            coeffs[2] = mu.mul_2exp(-4).neg();
        }
        _ => {
            return Err(Error::InvalidParam("seed degree must be 2 or 4".into()));
        }
    }
    let h = ChebSeries::new(coeffs, Parity::Even, rho);
    // alpha = h^m(0) at midpoint precision
    let mut x = Float::with_val(prec, 0);
    for _ in 0..spec.m {
        x = h.eval_f(&x).mid();
    }
    Ok(CandidatePair::new(Scalar::point(x), h))
}

fn residual_vector(
    p: &RenormProblem,
    cand: &CandidatePair,
    plan: &DctPlan,
) -> Result<Vec<Float>> {
    let ctx = ChainCtx::point(p.m, cand, &p.rho);
    let prec = cand.prec();
    let values = phi_values(&ctx, plan.nodes_even())?;
    let series = plan.coeffs_from_raw(&values, Parity::Even, p.rho.clone());
    let mut out = Vec::with_capacity(p.k + 2);
    let phase = cand.h.eval_s(&Scalar::zero(prec)).sub(&Scalar::one(prec));
    out.push(phase.mid());
    out.extend(series.coeffs().iter().map(|c| c.mid()));
    Ok(out)
}

fn weighted_norm_f(v: &[Float], w: &[Scalar]) -> Float {
    let prec = v[0].prec();
    let mut acc = Float::with_val(prec, 0);
    for (x, wi) in v.iter().zip(w) {
        acc += x.clone().abs() * wi.mid();
    }
    acc
}

/// Default Newton tolerance at a given precision: 10^(-0.9 * digits).
pub fn default_tol(prec: u32) -> Float {
    let digits = prec as f64 * std::f64::consts::LN_2 / std::f64::consts::LN_10;
    let t = Float::with_val(prec, 10);
    t.pow(Float::with_val(prec, -0.9 * digits))
}

/// Newton iteration on the projected zero map at midpoint precision.
/// Full steps with residual-halving safeguard; the Jacobian is refreshed
/// whenever the residual contraction stalls.
pub fn newton_solve(
    p: &RenormProblem,
    start: &CandidatePair,
    tol: &Float,
    max_iter: u32,
) -> Result<CandidatePair> {
    let prec = p.prec;
    let plan = DctPlan::new(p.k, prec);
    let weights = space_weights(&p.rho, p.k + 2);
    // the weighted residual cannot drop below the arithmetic floor set by
    // the top-mode weight; clamp the tolerance there
    let floor = {
        let mut f = Float::with_val(prec, Float::u_exp(1, 2 - prec as i32));
        f *= p.rho.mag_upper().pow((2 * p.k) as u32);
        f *= Float::with_val(prec, 100 * (p.k as u32 + 2));
        f
    };
    let tol = if *tol < floor { floor } else { tol.clone() };
    let tol = &tol;
    let mut cand = CandidatePair::new(
        start.alpha.with_prec(prec),
        start.h.pad_to(p.k + 1).to_point_series(),
    );
    let mut cand = CandidatePair::new(
        Scalar::point(cand.alpha.mid()),
        std::mem::replace(&mut cand.h, ChebSeries::zero(Parity::Even, prec, p.rho.clone())),
    );
    let mut res = residual_vector(p, &cand, &plan)?;
    let mut res_norm = weighted_norm_f(&res, &weights);
    let mut jac: Option<FMat> = None;
    let mut last_norm = Float::with_val(prec, f64::INFINITY);
    for _ in 0..max_iter {
        if res_norm <= *tol {
            return Ok(cand);
        }
        // refresh the Jacobian unless the residual is contracting fast
        let contracting = res_norm.clone() / &last_norm < 0.25;
        if jac.is_none() || !contracting {
            let ctx = ChainCtx::point(p.m, &cand, &p.rho);
            let cols = dphi_matrix(&ctx, &plan, &p.rho)?;
            let n = cols.len();
            let mut m = FMat::zeros(n, prec);
            for (c, col) in cols.iter().enumerate() {
                for (r, v) in col.iter().enumerate() {
                    *m.at_mut(r, c) = v.mid();
                }
            }
            jac = Some(m);
        }
        let neg_res: Vec<Float> = res.iter().map(|x| Float::with_val(prec, -x)).collect();
        let step = jac.as_ref().unwrap().solve(&neg_res)?;
        // damped update
        let mut scale = Float::with_val(prec, 1);
        let mut accepted = false;
        for _ in 0..=8 {
            let mut alpha = cand.alpha.mid();
            alpha += step[0].clone() * &scale;
            let coeffs: Vec<Scalar> = (0..=p.k)
                .map(|i| {
                    let mut c = cand.h.coeffs()[i].mid();
                    c += step[1 + i].clone() * &scale;
                    Scalar::point(c)
                })
                .collect();
            let trial = CandidatePair::new(
                Scalar::point(alpha),
                ChebSeries::new(coeffs, Parity::Even, p.rho.clone()),
            );
            let trial_res = residual_vector(p, &trial, &plan)?;
            let trial_norm = weighted_norm_f(&trial_res, &weights);
            if trial_norm < res_norm || scale.to_f64() < 1.0 / 200.0 {
                last_norm = std::mem::replace(&mut res_norm, trial_norm);
                res = trial_res;
                cand = trial;
                accepted = true;
                break;
            }
            scale /= 2u32;
        }
        if !accepted {
            return Err(Error::NoConvergence(max_iter as usize));
        }
    }
    if res_norm <= *tol {
        Ok(cand)
    } else {
        Err(Error::NoConvergence(max_iter as usize))
    }
}

/// Seed, then solve with continuation in the number of modes: the problem
/// is first solved with few modes and the result padded and re-solved at
/// the requested k.
pub fn solve_from_seed(p: &RenormProblem, spec: &SeedSpec) -> Result<CandidatePair> {
    let tol = default_tol(p.prec);
    let mut stages: Vec<usize> = Vec::new();
    let mut k = p.k.min(8);
    loop {
        stages.push(k);
        if k >= p.k {
            break;
        }
        k = (k * 3).min(p.k);
    }
    let mut cand = seed(&SeedSpec {
        k: stages[0],
        ..spec.clone()
    })?;
    for (idx, &stage_k) in stages.iter().enumerate() {
        let stage_p = RenormProblem::new(
            p.m,
            p.d,
            stage_k,
            p.rho.clone(),
            p.prec,
            p.r_star.clone(),
        )?;
        // coarse stages only need a loose tolerance
        let stage_tol = if idx + 1 == stages.len() {
            tol.clone()
        } else {
            Float::with_val(p.prec, 1e-8)
        };
        cand = newton_solve(&stage_p, &cand, &stage_tol, 80)?;
    }
    if p.d == 4 {
        let projected = crate::operator::project_degree_subspace(&cand.h, 4)?;
        cand = CandidatePair::new(cand.alpha.clone(), projected);
        // one more Newton pass keeps the residual at the floor; the
        // projection correction is tiny so this converges immediately
        cand = newton_solve(p, &cand, &tol, 20)?;
        let projected = crate::operator::project_degree_subspace(&cand.h, 4)?;
        cand = CandidatePair::new(cand.alpha.clone(), projected);
    }
    Ok(cand)
}

/// Approximate dominant eigenpair of the projected linearization at the
/// candidate, normalized so the zeroth Chebyshev coefficient of u is one.
pub fn eig_approx(p: &RenormProblem, cand: &CandidatePair) -> Result<(Float, ChebSeries)> {
    let prec = p.prec;
    let plan = DctPlan::new(p.k, prec);
    let ctx = ChainCtx::point(p.m, &cand.to_point(), &p.rho);
    let data = build_dr_data(&ctx, plan.nodes_even())?;
    // coordinate block of Pi DR: from the full DF matrix at lambda = 0
    let zero_u = ChebSeries::zero(Parity::Even, prec, p.rho.clone());
    let cols = df_matrix(
        &ctx,
        &data,
        &Scalar::zero(prec),
        &zero_u,
        &plan,
        &p.rho,
    )?;
    let n = p.k + 1;
    let mut a = FMat::zeros(n, prec);
    for c in 0..n {
        for r in 0..n {
            *a.at_mut(r, c) = cols[1 + c][1 + r].mid();
        }
    }
    // power iteration
    let mut v: Vec<Float> = (0..n)
        .map(|i| Float::with_val(prec, 1.0 / (1.0 + i as f64)))
        .collect();
    let mut lambda = Float::with_val(prec, 0);
    let mut converged = false;
    for _ in 0..400 {
        let av = a.mat_vec(&v);
        // estimate via the largest component
        let mut pivot = 0usize;
        let mut best = Float::with_val(prec, 0);
        for (i, x) in av.iter().enumerate() {
            let ax = x.clone().abs();
            if ax > best {
                best = ax;
                pivot = i;
            }
        }
        if best.is_zero() {
            return Err(Error::EigenEstimate);
        }
        let new_lambda = Float::with_val(prec, &av[pivot] / &v[pivot]);
        let scale = av[pivot].clone();
        v = av.into_iter().map(|x| Float::with_val(prec, x / &scale)).collect();
        let rel = (new_lambda.clone() - &lambda).abs() / new_lambda.clone().abs();
        lambda = new_lambda;
        if rel.to_f64() < 1e-12 {
            converged = true;
            break;
        }
    }
    if !converged || !lambda.is_finite() || lambda.clone().abs() <= 1 {
        return Err(Error::EigenEstimate);
    }
    // normalize u_0 = 1
    if v[0].is_zero() {
        return Err(Error::EigenEstimate);
    }
    let v0 = v[0].clone();
    for x in v.iter_mut() {
        *x /= &v0;
    }
    // Newton refinement on F(lambda, u) = (u_0 - 1, DR u - lambda u)
    let weights = space_weights(&p.rho, p.k + 2);
    let mut u = ChebSeries::new(
        v.into_iter().map(Scalar::point).collect(),
        Parity::Even,
        p.rho.clone(),
    );
    let mut floor = Float::with_val(prec, f64::INFINITY);
    for _ in 0..60 {
        let du = crate::operator::dr_apply_series(&ctx, &data, &u, &plan, &p.rho)?;
        let mut res: Vec<Float> = Vec::with_capacity(p.k + 2);
        let mut u0 = u.coeffs()[0].mid();
        u0 -= 1u32;
        res.push(u0);
        for (i, c) in du.coeffs().iter().enumerate() {
            let mut x = c.mid();
            x -= Float::with_val(prec, &lambda * &u.coeffs()[i].mid());
            res.push(x);
        }
        let res_norm = weighted_norm_f(&res, &weights);
        // stop once the residual hits the arithmetic floor
        let target = Float::with_val(prec, default_tol(prec) * 1e6);
        if res_norm <= target || res_norm >= floor {
            break;
        }
        floor = res_norm;
        let cols = df_matrix(&ctx, &data, &Scalar::point(lambda.clone()), &u, &plan, &p.rho)?;
        let n2 = p.k + 2;
        let mut dfm = FMat::zeros(n2, prec);
        for (c, col) in cols.iter().enumerate() {
            for (r, x) in col.iter().enumerate() {
                *dfm.at_mut(r, c) = x.mid();
            }
        }
        let neg: Vec<Float> = res.iter().map(|x| Float::with_val(prec, -x)).collect();
        let step = dfm.solve(&neg)?;
        lambda += &step[0];
        let coeffs: Vec<Scalar> = (0..=p.k)
            .map(|i| {
                let mut c = u.coeffs()[i].mid();
                c += &step[1 + i];
                Scalar::point(c)
            })
            .collect();
        u = ChebSeries::new(coeffs, Parity::Even, p.rho.clone());
    }
    Ok((lambda, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_coefficients_quadratic() {
        let spec = SeedSpec {
            m: 2,
            d: 2,
            mu: 1.0,
            k: 4,
            prec: 128,
        };
        let cand = seed(&spec).unwrap();
        // 1 - x^2: h_0 = 1/2, h_2 = -1/4
        assert!((cand.h.coeffs()[0].to_f64_mid() - 0.5).abs() < 1e-15);
        assert!((cand.h.coeffs()[1].to_f64_mid() + 0.25).abs() < 1e-15);
        // mu = 0 -> constant 1, alpha = 1
        let cand = seed(&SeedSpec {
            mu: 0.0,
            ..spec.clone()
        })
        .unwrap();
        assert!((cand.h.coeffs()[0].to_f64_mid() - 1.0).abs() < 1e-15);
        assert!((cand.alpha.to_f64_mid() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seed_coefficients_quartic() {
        let spec = SeedSpec {
            m: 2,
            d: 4,
            mu: 1.0,
            k: 4,
            prec: 128,
        };
        let cand = seed(&spec).unwrap();
        assert!((cand.h.coeffs()[0].to_f64_mid() - 0.625).abs() < 1e-15);
        assert!((cand.h.coeffs()[1].to_f64_mid() + 0.25).abs() < 1e-15);
        assert!((cand.h.coeffs()[2].to_f64_mid() + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn superstable_quadratic_known_values() {
        // period 2 superstable at mu = 1; period 4 at 1.3107...
        let ss2 = superstable_params(2, 2, 0.8, 1.2);
        assert_eq!(ss2.len(), 1);
        assert!((ss2[0] - 1.0).abs() < 1e-9);
        let ss4 = superstable_params(2, 4, 1.2, 1.4);
        assert!((ss4[0] - 1.3107026).abs() < 1e-5, "{:?}", ss4);
    }

    #[test]
    fn seed_param_m2_near_doubling_accumulation() {
        let seeds = seed_params(2, 2);
        assert!(
            seeds.iter().any(|&mu| (mu - 1.401155).abs() < 5e-3),
            "{seeds:?}"
        );
    }

    #[test]
    fn newton_converges_for_m2() {
        let prec = 128u32;
        let p = RenormProblem::new(
            2,
            2,
            12,
            Scalar::from_i(2, prec),
            prec,
            Float::with_val(prec, 1e-15),
        )
        .unwrap();
        let cand = solve_from_seed(
            &p,
            &SeedSpec {
                m: 2,
                d: 2,
                mu: 1.401155,
                k: 12,
                prec,
            },
        )
        .unwrap();
        // alpha matches the classical value to double accuracy at k=12
        let alpha = cand.alpha.to_f64_mid();
        assert!(
            (alpha + 0.3995352805231345).abs() < 1e-10,
            "alpha = {alpha}"
        );
        // idempotence: restarting from the solution returns immediately
        let tol = default_tol(prec);
        let again = newton_solve(&p, &cand, &tol, 2).unwrap();
        assert!((again.alpha.to_f64_mid() - alpha).abs() < 1e-12);
    }

    #[test]
    fn eig_m2_matches_feigenbaum() {
        let prec = 128u32;
        let p = RenormProblem::new(
            2,
            2,
            12,
            Scalar::from_i(2, prec),
            prec,
            Float::with_val(prec, 1e-15),
        )
        .unwrap();
        let cand = solve_from_seed(
            &p,
            &SeedSpec {
                m: 2,
                d: 2,
                mu: 1.401155,
                k: 12,
                prec,
            },
        )
        .unwrap();
        let (lambda, u) = eig_approx(&p, &cand).unwrap();
        assert!(
            (lambda.to_f64() - 4.669201609102990).abs() < 1e-8,
            "lambda = {lambda}"
        );
        assert!((u.coeffs()[0].to_f64_mid() - 1.0).abs() < 1e-20);
    }
}
