//! Closed-form a-priori constants: the derivative bounds sigma, the
//! interpolation error constants Upsilon, coefficient decay bounds for
//! interpolants of analytic functions, and norm conversion factors between
//! l^1_rho and C^0_nu. All evaluated rigorously in interval arithmetic.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parity of the function an estimate applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FnParity {
    Even,
    Odd,
    General,
}

fn require_lt(rho: &Scalar, nu: &Scalar, what: &str) -> Result<()> {
    if !(rho.hi() < nu.lo()) {
        return Err(Error::InvalidParam(format!("{what} needs rho < nu")));
    }
    Ok(())
}

fn is_exactly_one(x: &Scalar) -> bool {
    x.is_point() && *x.lo() == 1
}

fn ceil_upper(x: &Scalar) -> u32 {
    let f = x.hi().to_f64();
    if !f.is_finite() || f < 0.0 {
        return 1;
    }
    f.ceil() as u32 + 1
}

/// sigma^even_{rho,nu}: for even h in l^1_nu, ||h'||_{C0_rho} <= sigma ||h||.
pub fn sigma_even(rho: &Scalar, nu: &Scalar) -> Result<Scalar> {
    sigma_impl(rho, nu, true)
}

/// sigma^odd_{rho,nu}: same bound for odd h.
pub fn sigma_odd(rho: &Scalar, nu: &Scalar) -> Result<Scalar> {
    sigma_impl(rho, nu, false)
}

/// sigma for arbitrary parity: max of the even and odd constants.
pub fn sigma_general(rho: &Scalar, nu: &Scalar) -> Result<Scalar> {
    Ok(sigma_even(rho, nu)?.max_iv(&sigma_odd(rho, nu)?))
}

pub fn sigma_for(parity: FnParity, rho: &Scalar, nu: &Scalar) -> Result<Scalar> {
    match parity {
        FnParity::Even => sigma_even(rho, nu),
        FnParity::Odd => sigma_odd(rho, nu),
        FnParity::General => sigma_general(rho, nu),
    }
}

fn sigma_impl(rho: &Scalar, nu: &Scalar, even: bool) -> Result<Scalar> {
    require_lt(rho, nu, "sigma")?;
    if rho.lo() < &1 {
        return Err(Error::InvalidParam("sigma needs rho >= 1".into()));
    }
    let p = rho.prec().max(nu.prec());
    if is_exactly_one(rho) {
        // sup of (2n)^2/nu^{2n} (even) resp. (2n+1)^2/nu^{2n+1} (odd); the
        // map x^2 nu^{-x} decreases for x >= 2/ln(nu)
        let ln_nu = nu.ln()?;
        let x_star = Scalar::from_i(2, p).checked_div(&ln_nu)?;
        let n_max = ceil_upper(&x_star).max(8);
        let mut best = Scalar::zero(p);
        let nu2 = nu.square();
        // pw = nu^x with x = 2n (even) or 2n+1 (odd)
        let mut pw = if even { Scalar::one(p) } else { nu.clone() };
        for n in 0..=n_max as u64 {
            if n > 0 {
                pw = pw.mul(&nu2);
            }
            if even && n == 0 {
                continue;
            }
            let x = if even { 2 * n } else { 2 * n + 1 };
            let term = Scalar::from_u(x * x, p).checked_div(&pw)?;
            best = best.max_iv(&term);
        }
        return Ok(best);
    }

    // general 1 < rho < nu
    let one = Scalar::one(p);
    let rho2 = rho.square();
    let inv_rho = rho.recip()?;
    let inv_rho2 = inv_rho.square();
    let denom_pos = rho2.sub(&one); // rho^2 - 1 > 0
    let denom_neg = one.sub(&inv_rho2); // 1 - rho^{-2} > 0
    let ln_ratio = nu.ln()?.sub(&rho.ln()?);
    if !(ln_ratio.lo() > &0) {
        return Err(Error::InvalidParam("sigma needs nu > rho".into()));
    }
    let half = Scalar::one(p).mul_2exp(-1);
    let n0_min = ceil_upper(&half.checked_div(&ln_ratio)?).max(8);

    let term_at = |n: u64, rho_pw: &Scalar, irho_pw: &Scalar, nu_pw: &Scalar| -> Result<Scalar> {
        if even {
            // (2n/nu^{2n}) (rho (rho^{2n}-1)/(rho^2-1) + rho^{-1}(rho^{-2n}-1)/(rho^{-2}-1))
            let t1 = rho.mul(&rho_pw.sub(&one)).checked_div(&denom_pos)?;
            let t2 = inv_rho.mul(&one.sub(irho_pw)).checked_div(&denom_neg)?;
            Ok(Scalar::from_u(2 * n, p)
                .checked_div(nu_pw)?
                .mul(&t1.add(&t2)))
        } else {
            // ((2n+1)/nu^{2n+1}) (1 + rho^2 (rho^{2n}-1)/(rho^2-1) + rho^{-2}(rho^{-2n}-1)/(rho^{-2}-1))
            let t1 = rho2.mul(&rho_pw.sub(&one)).checked_div(&denom_pos)?;
            let t2 = inv_rho2.mul(&one.sub(irho_pw)).checked_div(&denom_neg)?;
            Ok(Scalar::from_u(2 * n + 1, p)
                .checked_div(&nu_pw.mul(nu))?
                .mul(&one.add(&t1).add(&t2)))
        }
    };
    let tail_at = |n0: u32| -> Result<Scalar> {
        let rho_pw_n0 = rho2.pow_u(n0);
        let nu_pw_n0 = nu.square().pow_u(n0);
        if even {
            let t1 = rho_pw_n0.mul(&rho.checked_div(&denom_pos)?);
            let t2 = inv_rho.checked_div(&denom_neg)?;
            Ok(Scalar::from_u(2 * n0 as u64, p)
                .checked_div(&nu_pw_n0)?
                .mul(&t1.add(&t2)))
        } else {
            let t1 = rho_pw_n0.mul(&rho2).checked_div(&denom_pos)?;
            let t2 = inv_rho2.checked_div(&denom_neg)?;
            Ok(Scalar::from_u(2 * n0 as u64 + 1, p)
                .checked_div(&nu_pw_n0.mul(nu))?
                .mul(&one.add(&t1).add(&t2)))
        }
    };

    let mut best = Scalar::zero(p);
    if !even {
        // the odd n=0 term: 1/nu
        best = best.max_iv(&one.checked_div(nu)?);
    }
    let nu2 = nu.square();
    let mut nu_pw = Scalar::one(p); // nu^{2n}
    let mut rho_pw = Scalar::one(p); // rho^{2n}
    let mut irho_pw = Scalar::one(p); // rho^{-2n}
    let mut n = 0u64;
    let mut n0 = n0_min;
    // extend the enumeration until the tail majorant is dominated by the
    // finite maximum; the relaxation (rho^{2n}-1 -> rho^{2n}) inside the
    // tail is very lossy for rho close to 1, so n0 may need to grow well
    // beyond the monotonicity threshold before the bound becomes sharp
    loop {
        while n + 1 < n0 as u64 {
            n += 1;
            nu_pw = nu_pw.mul(&nu2);
            rho_pw = rho_pw.mul(&rho2);
            irho_pw = irho_pw.mul(&inv_rho2);
            best = best.max_iv(&term_at(n, &rho_pw, &irho_pw, &nu_pw)?);
        }
        let tail = tail_at(n0)?;
        if tail.hi() <= best.lo() || n0 > (1 << 22) {
            return Ok(best.max_iv(&tail));
        }
        n0 *= 2;
    }
}

/// Upsilon^{0,1}_{rho,nu,K}: ||h - Pi^K h||_{C0_rho} <= Upsilon ||h||_{l1_nu}.
/// `order` is the interpolation order K; parity Even requires it even.
pub fn upsilon_01(rho: &Scalar, nu: &Scalar, order: usize, even: bool) -> Result<Scalar> {
    if rho.lo() < &1 || rho.hi() > nu.hi() {
        return Err(Error::InvalidParam("upsilon_01 needs 1 <= rho <= nu".into()));
    }
    let p = rho.prec().max(nu.prec());
    let shift = if even { 2 } else { 1 };
    if even && order % 2 != 0 {
        return Err(Error::InvalidParam("even upsilon_01 needs even order".into()));
    }
    if order < shift {
        return Err(Error::InvalidParam("order too small".into()));
    }
    let k_minus = order - shift;
    let k_plus = order + shift;
    let rp = |k: usize| rho.pow_u(k as u32);
    let rp_inv = |k: usize| -> Result<Scalar> { rho.pow_u(k as u32).recip() };
    let num = rp(k_minus)
        .add(&rp_inv(k_minus)?)
        .add(&rp(k_plus))
        .add(&rp_inv(k_plus)?);
    let den = nu.pow_u(k_plus as u32);
    Ok(num.checked_div(&den)?.mul_2exp(-1).with_prec(p))
}

/// Upsilon^{1,0}_{rho,nu,K}: ||h - Pi^K h||_{l1_rho} <= Upsilon ||h||_{C0_nu}.
pub fn upsilon_10(rho: &Scalar, nu: &Scalar, order: usize, even: bool) -> Result<Scalar> {
    require_lt(rho, nu, "upsilon_10")?;
    if rho.lo() < &1 {
        return Err(Error::InvalidParam("upsilon_10 needs rho >= 1".into()));
    }
    if even && order % 2 != 0 {
        return Err(Error::InvalidParam("even upsilon_10 needs even order".into()));
    }
    let p = rho.prec().max(nu.prec());
    let one = Scalar::one(p);
    let ku = order as u32;
    let ratio_k = rho.checked_div(nu)?.pow_u(ku); // (rho/nu)^K
    let nu2k = nu.pow_u(2 * ku);
    let nurho_k = nu.mul(rho).pow_u(ku);
    let (front, back) = if even {
        // rho^2/(nu^2-rho^2), ((nu rho)^K - 1)/((nu rho)^2 - 1)
        let d = nu.square().sub(&rho.square());
        let f = rho.square().checked_div(&d)?;
        let b = nurho_k
            .sub(&one)
            .checked_div(&nu.mul(rho).square().sub(&one))?;
        (f, b)
    } else {
        let d = nu.sub(rho);
        let f = rho.checked_div(&d)?;
        let b = nurho_k.sub(&one).checked_div(&nu.mul(rho).sub(&one))?;
        (f, b)
    };
    let first = Scalar::from_i(2, p)
        .checked_div(&nu2k.sub(&one))?
        .mul(&front.mul(&one.sub(&ratio_k)).add(&back));
    let second = front.mul_2exp(1).mul(&ratio_k);
    Ok(first.add(&second))
}

/// Bounds on the Chebyshev coefficients of Pi^K g for g analytic on E_rho
/// with ||g||_{C0_rho} <= c0. Entry k bounds |g-check_k|, k = 0..order.
pub fn coeff_decay_bounds(c0: &Scalar, rho: &Scalar, order: usize) -> Result<Vec<Scalar>> {
    if rho.lo() <= &1 {
        return Err(Error::InvalidParam("coeff_decay_bounds needs rho > 1".into()));
    }
    let p = c0.prec().max(rho.prec());
    let one = Scalar::one(p);
    let rho2k = rho.pow_u(2 * order as u32);
    let den = rho2k.sub(&one);
    let inv_rho = rho.recip()?;
    let mut out = Vec::with_capacity(order + 1);
    // k = 0: c0 (rho^{2K}+1)/(rho^{2K}-1)
    out.push(c0.mul(&rho2k.add(&one).checked_div(&den)?));
    let mut irho_pw = Scalar::one(p); // rho^{-k}
    let mut rho_pw2 = Scalar::one(p); // rho^{2k}
    let rho2 = rho.square();
    for k in 1..=order {
        irho_pw = irho_pw.mul(&inv_rho);
        rho_pw2 = rho_pw2.mul(&rho2);
        let e = if k < order {
            // (c0/rho^k) (rho^{2K} + rho^{2k})/(rho^{2K}-1)
            c0.mul(&irho_pw)
                .mul(&rho2k.add(&rho_pw2).checked_div(&den)?)
        } else {
            // (c0/rho^K) rho^{2K}/(rho^{2K}-1)
            c0.mul(&irho_pw).mul(&rho2k.checked_div(&den)?)
        };
        out.push(e);
    }
    Ok(out)
}

/// ||h||_{l1_rho} <= C ||h||_{C0_nu} for h analytic on E_nu:
/// C = (nu+rho)/(nu-rho), or (nu^2+rho^2)/(nu^2-rho^2) for even h,
/// or 2 nu rho/(nu^2-rho^2) for odd h.
pub fn norm_conversion(rho: &Scalar, nu: &Scalar, parity: FnParity) -> Result<Scalar> {
    require_lt(rho, nu, "norm_conversion")?;
    match parity {
        FnParity::General => nu.add(rho).checked_div(&nu.sub(rho)),
        FnParity::Even => nu
            .square()
            .add(&rho.square())
            .checked_div(&nu.square().sub(&rho.square())),
        FnParity::Odd => nu
            .mul(rho)
            .mul_2exp(1)
            .checked_div(&nu.square().sub(&rho.square())),
    }
}

/// Non-rigorous 1-D minimization helper for tuning parameters like nu:
/// log-spaced scan over (lo, hi] followed by one golden-section pass.
/// The objective returns None where the parameter is inadmissible. The
/// caller must re-evaluate its bound rigorously at the returned point.
pub fn optimize_param(
    lo: f64,
    hi: f64,
    candidates: usize,
    mut objective: impl FnMut(f64) -> Option<f64>,
) -> Option<f64> {
    assert!(lo > 0.0 && hi > lo);
    let mut best: Option<(f64, f64)> = None;
    let log_lo = lo.ln();
    let log_hi = hi.ln();
    let mut xs = Vec::with_capacity(candidates);
    for i in 1..=candidates {
        let t = i as f64 / candidates as f64;
        xs.push((log_lo + t * (log_hi - log_lo)).exp());
    }
    for &x in &xs {
        if let Some(v) = objective(x) {
            if v.is_finite() && best.map_or(true, |(_, bv)| v < bv) {
                best = Some((x, v));
            }
        }
    }
    let (bx, _) = best?;
    // one golden-section pass around the best candidate
    let step = (log_hi - log_lo) / candidates as f64;
    let mut a = (bx.ln() - step).exp().max(lo * (1.0 + 1e-12));
    let mut b = (bx.ln() + step).exp().min(hi);
    let phi = 0.618_033_988_749_895;
    for _ in 0..12 {
        let x1 = b - (b - a) * phi;
        let x2 = a + (b - a) * phi;
        let f1 = objective(x1);
        let f2 = objective(x2);
        match (f1, f2) {
            (Some(v1), Some(v2)) => {
                if v1 < v2 {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            (Some(_), None) => b = x2,
            (None, Some(_)) => a = x1,
            (None, None) => break,
        }
    }
    let mid = ((a.ln() + b.ln()) / 2.0).exp();
    match objective(mid) {
        Some(v) => {
            let (bx, bv) = best.unwrap();
            if v < bv {
                Some(mid)
            } else {
                Some(bx)
            }
        }
        None => Some(bx),
    }
}
