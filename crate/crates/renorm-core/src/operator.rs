//! Rigorous evaluation of the renormalization zero map, its directional
//! derivative, the orbit/composition chains underlying both, and the
//! linearization of the renormalization operator used for the eigenvalue
//! problem.
//!
//! Compositions are always evaluated in grid space: chains of enclosures of
//! h^j(alpha x) and of the derivative products are built at evaluation
//! points (Chebyshev nodes, or boxes on ellipse boundaries), never as
//! coefficient-space convolutions.

use crate::cheb::{even_basis_values, ChebSeries, DctPlan, Parity};
use crate::ellipse::circle_point;
use crate::error::{Error, Result};
use crate::estimates::sigma_even;
use crate::scalar::{ComplexBox, Scalar};
use rug::Float;

/// Configuration of one proof attempt.
#[derive(Clone, Debug)]
pub struct RenormProblem {
    /// Order of the renormalization operator (number of compositions).
    pub m: u32,
    /// Degree of the sought fixed point (2 or 4).
    pub d: u32,
    /// Mode parameter: candidates are even polynomials of degree 2k,
    /// validated through the interpolation projection of order 2k.
    pub k: usize,
    /// Weight of the ambient coefficient space.
    pub rho: Scalar,
    pub prec: u32,
    /// Radius of the ball on which the contraction is verified.
    pub r_star: Float,
}

impl RenormProblem {
    pub fn new(m: u32, d: u32, k: usize, rho: Scalar, prec: u32, r_star: Float) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParam("order m must be >= 1".into()));
        }
        if d % 2 != 0 {
            return Err(Error::InvalidParam("degree d must be even".into()));
        }
        if k < 2 {
            return Err(Error::InvalidParam("k must be >= 2".into()));
        }
        if !(rho.lo() > &1) {
            return Err(Error::InvalidParam("rho must exceed 1".into()));
        }
        if !(r_star > 0) {
            return Err(Error::InvalidParam("r_star must be positive".into()));
        }
        Ok(RenormProblem {
            m,
            d,
            k,
            rho,
            prec,
            r_star,
        })
    }

    /// Projection order used for the proof (always even).
    pub fn order(&self) -> usize {
        2 * self.k
    }
}

/// An approximate zero (alpha, h) of the renormalization zero map; h is an
/// even series of degree <= 2k.
#[derive(Clone, Debug)]
pub struct CandidatePair {
    pub alpha: Scalar,
    pub h: ChebSeries,
}

impl CandidatePair {
    pub fn new(alpha: Scalar, h: ChebSeries) -> Self {
        assert_eq!(h.parity(), Parity::Even);
        CandidatePair { alpha, h }
    }

    pub fn prec(&self) -> u32 {
        self.alpha.prec().max(self.h.prec())
    }

    pub fn to_point(&self) -> CandidatePair {
        CandidatePair {
            alpha: Scalar::point(self.alpha.mid()),
            h: self.h.to_point_series(),
        }
    }
}

/// Evaluation context for orbit chains: candidate data plus optional ball
/// inflation. With `ball_r` set, function values are inflated by r (valid
/// for arguments inside E_rho) and derivative values by
/// sigma^even_{beta,rho} r where beta covers the argument.
pub struct ChainCtx {
    pub m: u32,
    pub alpha: Scalar,
    pub h: ChebSeries,
    pub dh: ChebSeries,
    pub rho: Scalar,
    pub ball_r: Option<Float>,
    /// blow-up guard: enclosure width exceeding this times max(|mid|,1)
    /// aborts chain construction
    pub width_cap: f64,
    /// memo of derivative inflations, keyed by quantized beta upper bounds
    sigma_cache: std::cell::RefCell<Vec<(Float, Float)>>,
}

impl ChainCtx {
    pub fn point(m: u32, cand: &CandidatePair, rho: &Scalar) -> Self {
        ChainCtx {
            m,
            alpha: cand.alpha.clone(),
            h: cand.h.clone(),
            dh: cand.h.differentiate(),
            rho: rho.clone(),
            ball_r: None,
            width_cap: 1e6,
            sigma_cache: std::cell::RefCell::new(Vec::new()),
        }
    }

    pub fn ball(m: u32, cand: &CandidatePair, rho: &Scalar, r: &Float) -> Self {
        ChainCtx {
            m,
            alpha: cand.alpha.inflate(r),
            h: cand.h.clone(),
            dh: cand.h.differentiate(),
            rho: rho.clone(),
            ball_r: Some(r.clone()),
            width_cap: 1e6,
            sigma_cache: std::cell::RefCell::new(Vec::new()),
        }
    }

    fn real_semi_major(&self) -> Scalar {
        self.rho.add(&self.rho.recip().expect("rho > 1")).mul_2exp(-1)
    }

    /// h-tilde at a real interval argument.
    pub fn eval_h_s(&self, x: &Scalar) -> Result<Scalar> {
        let v = self.h.eval_s(x);
        match &self.ball_r {
            None => Ok(v),
            Some(r) => {
                if x.mag_upper() > self.real_semi_major().hi().clone() {
                    return Err(Error::OutsideDomain(format!(
                        "real argument {x} outside E_rho"
                    )));
                }
                Ok(v.inflate(r))
            }
        }
    }

    /// h-tilde at a complex box.
    pub fn eval_h_c(&self, z: &ComplexBox) -> Result<ComplexBox> {
        let v = self.h.eval_c(z);
        match &self.ball_r {
            None => Ok(v),
            Some(r) => {
                if !box_inside_ellipse(z, &self.rho) {
                    return Err(Error::OutsideDomain("box outside E_rho".into()));
                }
                Ok(v.inflate(r))
            }
        }
    }

    /// Derivative inflation magnitude valid for arguments within E_beta,
    /// beta < rho strictly. The sigma constants are memoized at quantized
    /// beta values (rounding beta up is sound: a larger domain cover gives
    /// a valid, if slightly larger, inflation).
    fn deriv_inflation(&self, beta: &Scalar) -> Result<Float> {
        let r = self.ball_r.as_ref().expect("ball context");
        if !(beta.hi() < self.rho.lo()) {
            return Err(Error::OutsideDomain(
                "derivative bound needs beta < rho".into(),
            ));
        }
        // quantize up by ~2^-9 relative, capped below rho
        let prec = beta.prec();
        let mut q = beta.hi().clone();
        let bump = Float::with_val(prec, &q >> 9);
        q += bump;
        if !(q < *self.rho.lo()) {
            q = beta.hi().clone();
        }
        if let Some((_, infl)) = self
            .sigma_cache
            .borrow()
            .iter()
            .find(|(b, _)| *b == q)
        {
            return Ok(infl.clone());
        }
        let sigma = sigma_even(&Scalar::point(q.clone()), &self.rho)?;
        let infl = sigma.mag_upper() * r;
        self.sigma_cache.borrow_mut().push((q, infl.clone()));
        Ok(infl)
    }

    pub fn eval_dh_s(&self, x: &Scalar, beta: &Scalar) -> Result<Scalar> {
        let v = self.dh.eval_s(x);
        match &self.ball_r {
            None => Ok(v),
            Some(_) => {
                let s = Scalar::point(x.mag_upper());
                let cover = beta_of_real_extent(&s);
                if cover.hi() > beta.hi() {
                    return Err(Error::OutsideDomain("argument exceeds beta cover".into()));
                }
                Ok(v.inflate(&self.deriv_inflation(beta)?))
            }
        }
    }

    pub fn eval_dh_c(&self, z: &ComplexBox, beta: &Scalar) -> Result<ComplexBox> {
        let v = self.dh.eval_c(z);
        match &self.ball_r {
            None => Ok(v),
            Some(_) => {
                if !box_inside_ellipse(z, beta) {
                    return Err(Error::OutsideDomain("box exceeds beta cover".into()));
                }
                Ok(v.inflate(&self.deriv_inflation(beta)?))
            }
        }
    }
}

/// Is the box contained in E_rho? Characterized by the focal distance sum:
/// max |w-1| + |w+1| <= rho + 1/rho.
pub fn box_inside_ellipse(z: &ComplexBox, rho: &Scalar) -> bool {
    let prec = z.prec().max(rho.prec());
    let one = Scalar::one(prec);
    let d1 = z.sub(&ComplexBox::from_real(one.clone())).mag_upper();
    let d2 = z.add_real(&one).mag_upper();
    let sum = Scalar::point(d1).add(&Scalar::point(d2));
    match rho.recip() {
        Ok(inv) => sum.hi() <= rho.add(&inv).lo(),
        Err(_) => false,
    }
}

/// Smallest beta with the real interval [-s, s] inside E_beta:
/// beta = s + sqrt(s^2 - 1) for s > 1, else 1.
pub fn beta_of_real_extent(s: &Scalar) -> Scalar {
    let prec = s.prec();
    let one = Scalar::one(prec);
    if s.hi() <= &1 {
        return one;
    }
    let s_up = Scalar::point(s.mag_upper());
    let disc = s_up.square().sub(&one).sqrt_clamped();
    Scalar::point(s_up.add(&disc).hi().clone())
}

/// Smallest beta with the box inside E_beta, from the focal distance sum
/// eta: beta = (eta + sqrt(eta^2 - 4))/2 clamped below at 1.
pub fn beta_of_box(z: &ComplexBox) -> Scalar {
    let prec = z.prec();
    let one = Scalar::one(prec);
    let d1 = z.sub(&ComplexBox::from_real(one.clone())).mag_upper();
    let d2 = z.add_real(&one).mag_upper();
    let eta = Scalar::point(d1).add(&Scalar::point(d2));
    let two = Float::with_val(prec, 2);
    let eta_up = if *eta.hi() < two {
        Scalar::point(two)
    } else {
        Scalar::point(eta.hi().clone())
    };
    let disc = eta_up.square().sub(&Scalar::from_i(4, prec)).sqrt_clamped();
    Scalar::point(eta_up.add(&disc).mul_2exp(-1).hi().clone())
}

/// Orbit chain at a set of real points: delta[j][i] encloses
/// h-tilde^j(alpha x_i) for j = 0..=m, and xi[j][i] encloses
/// prod_{l=j}^{m-1} h-tilde'(delta_l(x_i)) for j = 0..=m (xi[m] = 1).
/// The tilde-g factors of the derivative formulas are xi[j+1].
pub struct NodeChain {
    pub points: Vec<Scalar>,
    pub delta: Vec<Vec<Scalar>>,
    pub xi: Vec<Vec<Scalar>>,
}

impl NodeChain {
    pub fn gtilde(&self, j: usize) -> &[Scalar] {
        &self.xi[j + 1]
    }

    /// f-tilde(x) = x xi_0(x).
    pub fn ftilde(&self) -> Vec<Scalar> {
        self.points
            .iter()
            .zip(self.xi[0].iter())
            .map(|(x, xi0)| x.mul(xi0))
            .collect()
    }
}

fn check_widths(vals: &[Scalar], cap: f64, stage: &'static str) -> Result<()> {
    for (i, v) in vals.iter().enumerate() {
        let w = v.width_upper().to_f64();
        let m = v.mid().to_f64().abs().max(1.0);
        if w > cap * m {
            return Err(Error::Blowup { stage, index: i });
        }
    }
    Ok(())
}

pub fn build_node_chain(ctx: &ChainCtx, points: &[Scalar]) -> Result<NodeChain> {
    let m = ctx.m as usize;
    let mut delta: Vec<Vec<Scalar>> = Vec::with_capacity(m + 1);
    delta.push(points.iter().map(|x| ctx.alpha.mul(x)).collect());
    for j in 0..m {
        let next: Result<Vec<Scalar>> = delta[j].iter().map(|v| ctx.eval_h_s(v)).collect();
        let next = next?;
        check_widths(&next, ctx.width_cap, "orbit chain")?;
        delta.push(next);
    }
    // derivative cover: all delta_l(x) arguments for l = 0..m-1
    let prec = ctx.alpha.prec();
    let mut s_max = Float::with_val(prec, 0);
    for row in delta.iter().take(m) {
        for v in row {
            let mag = v.mag_upper();
            if mag > s_max {
                s_max = mag;
            }
        }
    }
    let beta = beta_of_real_extent(&Scalar::point(s_max));
    let n = points.len();
    let mut xi: Vec<Vec<Scalar>> = vec![Vec::new(); m + 1];
    xi[m] = vec![Scalar::one(prec); n];
    for j in (0..m).rev() {
        let row: Result<Vec<Scalar>> = (0..n)
            .map(|i| Ok(ctx.eval_dh_s(&delta[j][i], &beta)?.mul(&xi[j + 1][i])))
            .collect();
        let row = row?;
        check_widths(&row, ctx.width_cap, "derivative chain")?;
        xi[j] = row;
    }
    Ok(NodeChain {
        points: points.to_vec(),
        delta,
        xi,
    })
}

/// Orbit chain values at a complex box (delta and xi analogous to
/// `NodeChain`, at a single box).
pub struct BoxChain {
    pub delta: Vec<ComplexBox>,
    pub xi: Vec<ComplexBox>,
}

pub fn build_box_chain(ctx: &ChainCtx, z: &ComplexBox) -> Result<BoxChain> {
    let m = ctx.m as usize;
    let prec = z.prec().max(ctx.alpha.prec());
    let mut delta: Vec<ComplexBox> = Vec::with_capacity(m + 1);
    delta.push(z.scale(&ctx.alpha));
    for j in 0..m {
        delta.push(ctx.eval_h_c(&delta[j])?);
    }
    // a single derivative cover for all the arguments of this box
    let mut beta = Scalar::one(prec);
    if ctx.ball_r.is_some() {
        for d in delta.iter().take(m) {
            beta = beta.max_iv(&beta_of_box(d));
        }
    }
    let mut xi: Vec<ComplexBox> = vec![ComplexBox::from_real(Scalar::one(prec)); m + 1];
    for j in (0..m).rev() {
        let dv = ctx.eval_dh_c(&delta[j], &beta)?;
        xi[j] = dv.mul(&xi[j + 1]);
    }
    Ok(BoxChain { delta, xi })
}

/// Node values of phi(alpha, h)(x) = alpha h(x) - h^m(alpha x) for the
/// point candidate.
pub fn phi_values(ctx: &ChainCtx, points: &[Scalar]) -> Result<Vec<Scalar>> {
    let chain = build_node_chain(ctx, points)?;
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, x)| ctx.alpha.mul(&ctx.h.eval_s(x)).sub(&chain.delta[ctx.m as usize][i]))
        .collect())
}

/// Interpolation projection of phi through the plan's grid, optionally
/// intersected per coefficient with decay bounds from a C^0 estimate on a
/// larger ellipse (the two-estimates refinement).
pub fn phi_series(
    ctx: &ChainCtx,
    plan: &DctPlan,
    rho: &Scalar,
    decay: Option<&[Scalar]>,
) -> Result<ChebSeries> {
    let values = phi_values(ctx, plan.nodes_even())?;
    Ok(project_with_decay(plan, &values, rho.clone(), decay))
}

/// Inverse node transform with optional per-coefficient intersection with
/// magnitude bounds (indexed by true mode).
pub fn project_with_decay(
    plan: &DctPlan,
    values: &[Scalar],
    rho: Scalar,
    decay: Option<&[Scalar]>,
) -> ChebSeries {
    let series = plan.coeffs_from_raw(values, Parity::Even, rho);
    match decay {
        None => series,
        Some(bounds) => {
            let coeffs = series
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let mode = 2 * i;
                    match bounds.get(mode) {
                        Some(b) => {
                            let window = b.neg().hull(b);
                            c.try_intersect(&window).unwrap_or_else(|| c.clone())
                        }
                        None => c.clone(),
                    }
                })
                .collect();
            ChebSeries::new(coeffs, Parity::Even, series.rho().clone())
        }
    }
}

/// Full zero-map evaluation (h(0) - 1, Pi^order phi).
pub fn zero_map_eval(
    ctx: &ChainCtx,
    plan: &DctPlan,
    rho: &Scalar,
    decay: Option<&[Scalar]>,
) -> Result<(Scalar, ChebSeries)> {
    let prec = ctx.h.prec();
    let phase = ctx.h.eval_s(&Scalar::zero(prec)).sub(&Scalar::one(prec));
    let series = phi_series(ctx, plan, rho, decay)?;
    Ok((phase, series))
}

/// Directional derivative of the zero map at the context's data in the
/// direction (a, u), projected through the plan:
/// (u(0), Pi[ a (h - ftilde) + alpha u - sum gtilde_j u(delta_j) ]).
pub fn dphi_apply(
    ctx: &ChainCtx,
    chain: &NodeChain,
    a: &Scalar,
    u: &ChebSeries,
    plan: &DctPlan,
    rho: &Scalar,
) -> Result<(Scalar, ChebSeries)> {
    let m = ctx.m as usize;
    let prec = ctx.h.prec();
    let points = &chain.points;
    let ft = chain.ftilde();
    let values: Result<Vec<Scalar>> = points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut acc = a.mul(&ctx.eval_h_s(x)?.sub(&ft[i]));
            acc = acc.add(&ctx.alpha.mul(&u.eval_s(x)));
            for j in 0..m {
                acc = acc.sub(&chain.xi[j + 1][i].mul(&u.eval_s(&chain.delta[j][i])));
            }
            Ok(acc)
        })
        .collect();
    let series = project_with_decay(plan, &values?, rho.clone(), None);
    let phase = u.eval_s(&Scalar::zero(prec));
    Ok((phase, series))
}

/// The matrix of the projected derivative of the zero map on the basis
/// {(1,0)} union {(0, T_{2i}) : i = 0..k}. Layout: row/col 0 is the alpha
/// (phase) slot; row/col 1+i is the T_{2i} coefficient.
pub fn dphi_matrix(ctx: &ChainCtx, plan: &DctPlan, rho: &Scalar) -> Result<Vec<Vec<Scalar>>> {
    let m = ctx.m as usize;
    let k = plan.k();
    let n = k + 2;
    let prec = ctx.h.prec();
    let points = plan.nodes_even();
    let chain = build_node_chain(ctx, points)?;

    // basis values B[j][i][node] = T_{2i}(delta_j(x_node))
    let mut basis: Vec<Vec<Vec<Scalar>>> = Vec::with_capacity(m);
    for j in 0..m {
        let per_node: Vec<Vec<Scalar>> = chain.delta[j]
            .iter()
            .map(|v| even_basis_values(v, k + 1))
            .collect();
        // transpose to [i][node]
        let mut by_mode = vec![Vec::with_capacity(points.len()); k + 1];
        for node_vals in per_node {
            for (i, v) in node_vals.into_iter().enumerate() {
                by_mode[i].push(v);
            }
        }
        basis.push(by_mode);
    }

    let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    // alpha column: (0, Pi[h - ftilde])
    {
        let ft = chain.ftilde();
        let values: Result<Vec<Scalar>> = points
            .iter()
            .enumerate()
            .map(|(i, x)| Ok(ctx.eval_h_s(x)?.sub(&ft[i])))
            .collect();
        let series = project_with_decay(plan, &values?, rho.clone(), None);
        let mut col = Vec::with_capacity(n);
        col.push(Scalar::zero(prec));
        col.extend(series.coeffs().iter().cloned());
        cols.push(col);
    }
    // coordinate-unit columns: the stored coefficient vector e_i is the
    // function T_0 (i = 0) or 2 T_{2i} (i >= 1)
    for i in 0..=k {
        let values: Vec<Scalar> = (0..points.len())
            .map(|node| {
                let mut acc = Scalar::zero(prec);
                for j in 0..m {
                    acc = acc.add(&chain.xi[j + 1][node].mul(&basis[j][i][node]));
                }
                if i > 0 {
                    acc = acc.mul_2exp(1);
                }
                acc.neg()
            })
            .collect();
        let series = project_with_decay(plan, &values, rho.clone(), None);
        let mut col = Vec::with_capacity(n);
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let unit_scale = if i == 0 { 1 } else { 2 };
        col.push(Scalar::from_i(sign * unit_scale, prec)); // value at 0
        for (idx, c) in series.coeffs().iter().enumerate() {
            let mut e = c.clone();
            if idx == i {
                e = e.add(&ctx.alpha);
            }
            col.push(e);
        }
        cols.push(col);
    }
    Ok(cols)
}

/// Linearization data of the renormalization operator at the candidate
/// (used by the eigenvalue problem): node chain plus the scalar weights
/// involving the orbit of zero. Requires 0 to be the first node of the plan
/// grid, which holds for the half-grid.
pub struct DrData {
    pub chain: NodeChain,
    /// delta_m(0); must exclude zero.
    pub dm0: Scalar,
    /// xi_{j+1}(0) for j = 0..m-1
    pub xi0: Vec<Scalar>,
    /// q(x) = x xi_0(x) - delta_m(x)/delta_m(0) at the nodes
    pub weight: Vec<Scalar>,
}

pub fn build_dr_data(ctx: &ChainCtx, points: &[Scalar]) -> Result<DrData> {
    let m = ctx.m as usize;
    let chain = build_node_chain(ctx, points)?;
    if !points[0].contains_zero() || !points[0].is_point() {
        return Err(Error::InvalidParam("first chain point must be 0".into()));
    }
    let dm0 = chain.delta[m][0].clone();
    if dm0.contains_zero() {
        return Err(Error::DivisionByZero);
    }
    let xi0: Vec<Scalar> = (0..m).map(|j| chain.xi[j + 1][0].clone()).collect();
    let ft = chain.ftilde();
    let weight: Result<Vec<Scalar>> = (0..points.len())
        .map(|i| Ok(ft[i].sub(&chain.delta[m][i].checked_div(&dm0)?)))
        .collect();
    Ok(DrData {
        chain,
        dm0,
        xi0,
        weight: weight?,
    })
}

/// Node values of DR_m(f) u at the chain's points.
pub fn dr_apply_values(ctx: &ChainCtx, data: &DrData, u: &ChebSeries) -> Result<Vec<Scalar>> {
    let m = ctx.m as usize;
    // s = sum_j xi_{j+1}(0) u(delta_j(0))
    let mut s = Scalar::zero(ctx.h.prec());
    for j in 0..m {
        s = s.add(&data.xi0[j].mul(&u.eval_s(&data.chain.delta[j][0])));
    }
    (0..data.chain.points.len())
        .map(|i| {
            let mut acc = Scalar::zero(ctx.h.prec());
            for j in 0..m {
                acc = acc.add(&data.chain.xi[j + 1][i].mul(&u.eval_s(&data.chain.delta[j][i])));
            }
            acc = acc.add(&data.weight[i].mul(&s));
            acc.checked_div(&data.dm0)
        })
        .collect()
}

/// Pi^{order} DR_m(f) u as an even series.
pub fn dr_apply_series(
    ctx: &ChainCtx,
    data: &DrData,
    u: &ChebSeries,
    plan: &DctPlan,
    rho: &Scalar,
) -> Result<ChebSeries> {
    let values = dr_apply_values(ctx, data, u)?;
    Ok(project_with_decay(plan, &values, rho.clone(), None))
}

/// Columns of Pi^order DF(lambda, u) on the basis {(1,0)} union
/// {(0, T_{2i})} where F(lambda, u) = (u_0 - 1, DR_m(f) u - lambda u).
/// Row/col 0 is the lambda slot; row/col 1+i the T_{2i} coefficient.
pub fn df_matrix(
    ctx: &ChainCtx,
    data: &DrData,
    lambda: &Scalar,
    u: &ChebSeries,
    plan: &DctPlan,
    rho: &Scalar,
) -> Result<Vec<Vec<Scalar>>> {
    let m = ctx.m as usize;
    let k = plan.k();
    let n = k + 2;
    let prec = ctx.h.prec();
    let points = &data.chain.points;

    let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    // lambda column: (0, -u)
    {
        let mut col = Vec::with_capacity(n);
        col.push(Scalar::zero(prec));
        let padded = u.pad_to(k + 1);
        for c in padded.coeffs().iter().take(k + 1) {
            col.push(c.neg());
        }
        cols.push(col);
    }
    // basis values
    let mut basis: Vec<Vec<Vec<Scalar>>> = Vec::with_capacity(m);
    for j in 0..m {
        let per_node: Vec<Vec<Scalar>> = data.chain.delta[j]
            .iter()
            .map(|v| even_basis_values(v, k + 1))
            .collect();
        let mut by_mode = vec![Vec::with_capacity(points.len()); k + 1];
        for node_vals in per_node {
            for (i, v) in node_vals.into_iter().enumerate() {
                by_mode[i].push(v);
            }
        }
        basis.push(by_mode);
    }
    for i in 0..=k {
        // coordinate unit e_i is T_0 (i = 0) or 2 T_{2i} (i >= 1)
        let unit_scale = if i == 0 { 1 } else { 2 };
        // s_i = sum_j xi_{j+1}(0) u_i(delta_j(0))
        let mut s = Scalar::zero(prec);
        for j in 0..m {
            s = s.add(&data.xi0[j].mul(&basis[j][i][0]));
        }
        s = s.mul(&Scalar::from_i(unit_scale, prec));
        let values: Result<Vec<Scalar>> = (0..points.len())
            .map(|node| {
                let mut acc = Scalar::zero(prec);
                for j in 0..m {
                    acc = acc.add(&data.chain.xi[j + 1][node].mul(&basis[j][i][node]));
                }
                acc = acc.mul(&Scalar::from_i(unit_scale, prec));
                acc = acc.add(&data.weight[node].mul(&s));
                acc.checked_div(&data.dm0)
            })
            .collect();
        let series = project_with_decay(plan, &values?, rho.clone(), None);
        let mut col = Vec::with_capacity(n);
        col.push(if i == 0 {
            Scalar::one(prec) // E_0(T_0) = 1
        } else {
            Scalar::zero(prec)
        });
        for (idx, c) in series.coeffs().iter().enumerate() {
            let mut e = c.clone();
            if idx == i {
                e = e.sub(lambda);
            }
            col.push(e);
        }
        cols.push(col);
    }
    Ok(cols)
}

/// Closure factories for ellipse-boundary suprema of the chain quantities.
pub mod closures {
    use super::*;

    /// |phi(z)| = |alpha h(z) - h^m(alpha z)| on the boundary of E_nu.
    pub fn phi_abs(ctx: &ChainCtx, nu: Scalar) -> impl Fn(&Scalar) -> Result<Scalar> + '_ {
        move |theta| {
            let z = circle_point(theta, &nu)?;
            let chain = build_box_chain(ctx, &z)?;
            let hz = ctx.eval_h_c(&z)?;
            let v = hz.scale(&ctx.alpha).sub(&chain.delta[ctx.m as usize]);
            Ok(v.abs_iv())
        }
    }

    /// |gtilde_j(z)| = |xi_{j+1}(z)| on the boundary of E_gamma.
    pub fn gtilde_abs(
        ctx: &ChainCtx,
        gamma: Scalar,
        j: usize,
    ) -> impl Fn(&Scalar) -> Result<Scalar> + '_ {
        move |theta| {
            let z = circle_point(theta, &gamma)?;
            let chain = build_box_chain(ctx, &z)?;
            Ok(chain.xi[j + 1].abs_iv())
        }
    }

    /// |xi_j(z)| on the boundary of E_gamma.
    pub fn xi_abs(
        ctx: &ChainCtx,
        gamma: Scalar,
        j: usize,
    ) -> impl Fn(&Scalar) -> Result<Scalar> + '_ {
        move |theta| {
            let z = circle_point(theta, &gamma)?;
            let chain = build_box_chain(ctx, &z)?;
            Ok(chain.xi[j].abs_iv())
        }
    }

    /// |ftilde(z)| = |z xi_0(z)| on the boundary of E_nu.
    pub fn ftilde_abs(ctx: &ChainCtx, nu: Scalar) -> impl Fn(&Scalar) -> Result<Scalar> + '_ {
        move |theta| {
            let z = circle_point(theta, &nu)?;
            let chain = build_box_chain(ctx, &z)?;
            Ok(z.mul(&chain.xi[0]).abs_iv())
        }
    }

    /// eta functional of delta_j on the boundary of E_gamma:
    /// |delta_j(z) - 1| + |delta_j(z) + 1| (for image-radius bounds).
    pub fn delta_eta(
        ctx: &ChainCtx,
        gamma: Scalar,
        j: usize,
    ) -> impl Fn(&Scalar) -> Result<Scalar> + '_ {
        move |theta| {
            let z = circle_point(theta, &gamma)?;
            let chain = build_box_chain(ctx, &z)?;
            let w = &chain.delta[j];
            let prec = w.prec();
            let one = Scalar::one(prec);
            let d1 = w.sub(&ComplexBox::from_real(one.clone())).abs_iv();
            let d2 = w.add_real(&one).abs_iv();
            Ok(d1.add(&d2))
        }
    }

    /// |x xi_0(x) - delta_m(x)/delta_m(0)| on the boundary of E_nu.
    pub fn dr_weight_abs(
        ctx: &ChainCtx,
        nu: Scalar,
        dm0: Scalar,
    ) -> impl Fn(&Scalar) -> Result<Scalar> + '_ {
        move |theta| {
            let z = circle_point(theta, &nu)?;
            let chain = build_box_chain(ctx, &z)?;
            let prec = z.prec();
            let t1 = z.mul(&chain.xi[0]);
            let quot = {
                let inv = dm0.recip()?;
                chain.delta[ctx.m as usize].scale(&inv)
            };
            let v = t1.sub(&quot);
            let _ = prec;
            Ok(v.abs_iv())
        }
    }

    /// |DR_m(f) u (z)| on the boundary of E_nu (u evaluated along the
    /// chain; s0 = sum_j xi_{j+1}(0) u(delta_j(0)) precomputed).
    pub fn dr_apply_abs<'a>(
        ctx: &'a ChainCtx,
        nu: Scalar,
        u: &'a ChebSeries,
        dm0: Scalar,
        s0: Scalar,
    ) -> impl Fn(&Scalar) -> Result<Scalar> + 'a {
        move |theta| {
            let z = circle_point(theta, &nu)?;
            let chain = build_box_chain(ctx, &z)?;
            let m = ctx.m as usize;
            let prec = z.prec();
            let mut acc = ComplexBox::from_real(Scalar::zero(prec));
            for j in 0..m {
                acc = acc.add(&chain.xi[j + 1].mul(&u.eval_c(&chain.delta[j])));
            }
            let inv = dm0.recip()?;
            let w = z.mul(&chain.xi[0]).sub(&chain.delta[m].scale(&inv));
            acc = acc.add(&w.scale(&s0));
            Ok(acc.scale(&inv).abs_iv())
        }
    }

    /// Composition map z -> delta_j(z) for image-radius computations.
    pub fn delta_map<'a>(
        ctx: &'a ChainCtx,
        j: usize,
    ) -> impl Fn(&ComplexBox) -> Result<ComplexBox> + 'a {
        move |z| {
            let mut w = z.scale(&ctx.alpha);
            for _ in 0..j {
                w = ctx.eval_h_c(&w)?;
            }
            Ok(w)
        }
    }
}

/// Projection onto the degree-d candidate subspace. For d = 2 this is the
/// identity. For d = 4 the T_2 coefficient is adjusted by an exactly
/// representable correction so that h''(0) is exactly zero; the input must
/// be point (midpoint) data.
pub fn project_degree_subspace(h: &ChebSeries, d: u32) -> Result<ChebSeries> {
    if d == 2 {
        return Ok(h.clone());
    }
    if d != 4 {
        return Err(Error::InvalidParam("degree must be 2 or 4".into()));
    }
    assert_eq!(h.parity(), Parity::Even);
    let prec = h.prec();
    // exact rational value of L(h) = sum 8 i^2 (-1)^{i+1} h_{2i}
    let mut l = rug::Rational::new();
    for (i, c) in h.coeffs().iter().enumerate().skip(1) {
        if !c.is_point() {
            return Err(Error::InvalidParam(
                "subspace projection needs point coefficients".into(),
            ));
        }
        let r = c.lo().to_rational().ok_or(Error::SubspaceCorrection)?;
        let w = 8 * (i as i64) * (i as i64) * if i % 2 == 1 { 1 } else { -1 };
        l += r * rug::Rational::from((w, 1));
    }
    if l == 0 {
        return Ok(h.clone());
    }
    // correction on h_2: new h_2 = h_2 - L/8
    let h2 = h.coeffs()[1].lo().to_rational().ok_or(Error::SubspaceCorrection)?;
    let new_h2 = h2 - l / rug::Rational::from((8, 1));
    let f = Float::with_val(prec, &new_h2);
    if f.to_rational().map_or(true, |r| r != new_h2) {
        return Err(Error::SubspaceCorrection);
    }
    let mut coeffs = h.coeffs().to_vec();
    coeffs[1] = Scalar::point(f);
    let out = ChebSeries::new(coeffs, Parity::Even, h.rho().clone());
    // verify: the functional must now vanish identically
    let check = out.even_second_derivative_at_zero();
    if !check.contains_zero() || check.width_upper().to_f64() > 0.0 {
        return Err(Error::SubspaceCorrection);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::DctPlan;

    const P: u32 = 128;

    fn rho2() -> Scalar {
        Scalar::from_i(2, P)
    }

    fn const_one_candidate() -> CandidatePair {
        CandidatePair::new(
            Scalar::one(P),
            ChebSeries::new(vec![Scalar::one(P)], Parity::Even, rho2()),
        )
    }

    #[test]
    fn trivial_chain_constant_one() {
        // h = 1, alpha = 1, m = 3: delta_j = 1 for j >= 1; xi_j = 0 for
        // j < m (h' = 0), xi_m = 1; gtilde_{m-1} = xi_m = 1
        let cand = const_one_candidate();
        let ctx = ChainCtx::point(3, &cand, &rho2());
        let pts = vec![Scalar::from_ratio(1, 2, P)];
        let chain = build_node_chain(&ctx, &pts).unwrap();
        for j in 1..=3 {
            assert!(chain.delta[j][0].contains_f(&Float::with_val(P, 1)));
        }
        assert!(chain.xi[3][0].contains_f(&Float::with_val(P, 1)));
        for j in 0..3 {
            assert!(chain.xi[j][0].contains_zero());
        }
        // gtilde_j = 0 for j < m-1, gtilde_{m-1} = 1
        assert!(chain.gtilde(2)[0].contains_f(&Float::with_val(P, 1)));
        assert!(chain.gtilde(0)[0].contains_zero());
    }

    #[test]
    fn chain_m1_t2() {
        // m=1 chain on h=T_2, alpha=1, at x=1: delta_1(1) = T_2(1) = 1
        let cand = CandidatePair::new(
            Scalar::one(P),
            ChebSeries::basis(2, Parity::Even, P, rho2()),
        );
        let ctx = ChainCtx::point(1, &cand, &rho2());
        let chain = build_node_chain(&ctx, &[Scalar::one(P)]).unwrap();
        assert!(chain.delta[1][0].contains_f(&Float::with_val(P, 1)));
    }

    #[test]
    fn phi_zero_at_trivial_zero() {
        // (alpha, h) = (1, 1): phi = alpha h - h^m(alpha .) = 0, and the
        // phase h(0)-1 = 0
        let cand = const_one_candidate();
        let ctx = ChainCtx::point(2, &cand, &rho2());
        let plan = DctPlan::new(4, P);
        let (phase, series) = zero_map_eval(&ctx, &plan, &rho2(), None).unwrap();
        assert!(phase.contains_zero());
        for c in series.coeffs() {
            assert!(c.contains_zero());
            assert!(c.width_upper().to_f64() < 1e-30);
        }
    }

    #[test]
    fn phi_zero_for_m1_any_h() {
        // m=1, alpha=1: phi = h - h = 0
        let cand = CandidatePair::new(
            Scalar::one(P),
            ChebSeries::basis(2, Parity::Even, P, rho2()),
        );
        let ctx = ChainCtx::point(1, &cand, &rho2());
        let plan = DctPlan::new(4, P);
        let (_, series) = zero_map_eval(&ctx, &plan, &rho2(), None).unwrap();
        for c in series.coeffs() {
            assert!(c.contains_zero());
        }
    }

    #[test]
    fn dphi_linear_zero_direction() {
        let cand = const_one_candidate();
        let ctx = ChainCtx::point(2, &cand, &rho2());
        let plan = DctPlan::new(4, P);
        let chain = build_node_chain(&ctx, plan.nodes_even()).unwrap();
        let zero_dir = ChebSeries::zero(Parity::Even, P, rho2());
        let (phase, series) =
            dphi_apply(&ctx, &chain, &Scalar::zero(P), &zero_dir, &plan, &rho2()).unwrap();
        assert!(phase.contains_zero());
        for c in series.coeffs() {
            assert!(c.contains_zero());
        }
    }

    #[test]
    fn dphi_alpha_direction_constant_h() {
        // h = 1, alpha = 1, dir = (1, 0): d_alpha phi = h - ftilde; with
        // h' = 0 we get ftilde = 0, so the column is the constant 1
        let cand = const_one_candidate();
        let ctx = ChainCtx::point(2, &cand, &rho2());
        let plan = DctPlan::new(4, P);
        let chain = build_node_chain(&ctx, plan.nodes_even()).unwrap();
        let zero_dir = ChebSeries::zero(Parity::Even, P, rho2());
        let (_, series) =
            dphi_apply(&ctx, &chain, &Scalar::one(P), &zero_dir, &plan, &rho2()).unwrap();
        assert!(series.coeffs()[0].contains_f(&Float::with_val(P, 1)));
        for c in series.coeffs().iter().skip(1) {
            assert!(c.contains_zero());
        }
    }

    #[test]
    fn dphi_matches_finite_differences() {
        // smooth non-interval data: compare directional derivative against
        // centered differences of phi
        let rho = rho2();
        let h = ChebSeries::new(
            vec![
                Scalar::from_f64(0.6, P),
                Scalar::from_f64(-0.28, P),
                Scalar::from_f64(0.02, P),
            ],
            Parity::Even,
            rho.clone(),
        );
        let alpha = Scalar::from_f64(-0.4, P);
        let cand = CandidatePair::new(alpha.clone(), h.clone());
        let ctx = ChainCtx::point(2, &cand, &rho);
        let plan = DctPlan::new(6, P);
        let chain = build_node_chain(&ctx, plan.nodes_even()).unwrap();
        let u = ChebSeries::new(
            vec![Scalar::from_f64(0.3, P), Scalar::from_f64(0.11, P)],
            Parity::Even,
            rho.clone(),
        );
        let a_dir = Scalar::from_f64(0.7, P);
        let (_, d_series) = dphi_apply(&ctx, &chain, &a_dir, &u, &plan, &rho).unwrap();

        for eps in [1e-4, 1e-5, 1e-6] {
            let eps_s = Scalar::from_f64(eps, P);
            let plus = CandidatePair::new(
                alpha.add(&a_dir.mul(&eps_s)),
                h.add(&u.scale(&eps_s)),
            );
            let minus = CandidatePair::new(
                alpha.sub(&a_dir.mul(&eps_s)),
                h.sub(&u.scale(&eps_s)),
            );
            let ctx_p = ChainCtx::point(2, &plus, &rho);
            let ctx_m = ChainCtx::point(2, &minus, &rho);
            let phi_p = phi_series(&ctx_p, &plan, &rho, None).unwrap();
            let phi_m = phi_series(&ctx_m, &plan, &rho, None).unwrap();
            for (i, d) in d_series.coeffs().iter().enumerate() {
                let fd = phi_p.coeffs()[i]
                    .sub(&phi_m.coeffs()[i])
                    .to_f64_mid()
                    / (2.0 * eps);
                let dv = d.to_f64_mid();
                assert!(
                    (fd - dv).abs() < 200.0 * eps * (1.0 + dv.abs()),
                    "eps={eps} mode {i}: fd {fd} vs {dv}"
                );
            }
        }
    }

    #[test]
    fn dphi_matrix_column_consistency() {
        // a column of the matrix equals dphi_apply on that basis vector
        let rho = rho2();
        let h = ChebSeries::new(
            vec![
                Scalar::from_f64(0.55, P),
                Scalar::from_f64(-0.3, P),
                Scalar::from_f64(0.01, P),
            ],
            Parity::Even,
            rho.clone(),
        );
        let cand = CandidatePair::new(Scalar::from_f64(-0.38, P), h);
        let ctx = ChainCtx::point(2, &cand, &rho);
        let plan = DctPlan::new(4, P);
        let cols = dphi_matrix(&ctx, &plan, &rho).unwrap();
        let chain = build_node_chain(&ctx, plan.nodes_even()).unwrap();
        for i in 0..=4usize {
            // coordinate unit: stored coefficient vector e_i
            let mut coeffs = vec![Scalar::zero(P); i + 1];
            coeffs[i] = Scalar::one(P);
            let unit = ChebSeries::new(coeffs, Parity::Even, rho.clone());
            let (phase, series) =
                dphi_apply(&ctx, &chain, &Scalar::zero(P), &unit, &plan, &rho).unwrap();
            let col = &cols[1 + i];
            assert!(col[0].try_intersect(&phase).is_some());
            for (r, c) in series.coeffs().iter().enumerate() {
                assert!(
                    col[1 + r].try_intersect(c).is_some(),
                    "col {i} row {r}: {} vs {}",
                    col[1 + r],
                    c
                );
            }
        }
    }

    #[test]
    fn dr_apply_linearity() {
        let rho = rho2();
        let h = ChebSeries::new(
            vec![
                Scalar::from_f64(0.56, P),
                Scalar::from_f64(-0.32, P),
                Scalar::from_f64(0.015, P),
            ],
            Parity::Even,
            rho.clone(),
        );
        let cand = CandidatePair::new(Scalar::from_f64(-0.39, P), h);
        let ctx = ChainCtx::point(2, &cand, &rho);
        let plan = DctPlan::new(4, P);
        let data = build_dr_data(&ctx, plan.nodes_even()).unwrap();
        // u = 0 -> 0
        let zero = ChebSeries::zero(Parity::Even, P, rho.clone());
        let v = dr_apply_series(&ctx, &data, &zero, &plan, &rho).unwrap();
        for c in v.coeffs() {
            assert!(c.contains_zero());
        }
        // homogeneity: doubling u doubles the output (containment)
        let u = ChebSeries::new(
            vec![Scalar::from_f64(1.0, P), Scalar::from_f64(0.2, P)],
            Parity::Even,
            rho.clone(),
        );
        let v1 = dr_apply_series(&ctx, &data, &u, &plan, &rho).unwrap();
        let v2 = dr_apply_series(&ctx, &data, &u.scale(&Scalar::from_i(2, P)), &plan, &rho)
            .unwrap();
        for (a, b) in v1.coeffs().iter().zip(v2.coeffs()) {
            assert!(a.mul_2exp(1).try_intersect(b).is_some());
        }
        // additivity
        let w = ChebSeries::new(
            vec![Scalar::from_f64(-0.4, P), Scalar::from_f64(0.3, P)],
            Parity::Even,
            rho.clone(),
        );
        let vu = dr_apply_series(&ctx, &data, &u, &plan, &rho).unwrap();
        let vw = dr_apply_series(&ctx, &data, &w, &plan, &rho).unwrap();
        let vuw = dr_apply_series(&ctx, &data, &u.add(&w), &plan, &rho).unwrap();
        for ((a, b), c) in vu.coeffs().iter().zip(vw.coeffs()).zip(vuw.coeffs()) {
            assert!(a.add(b).try_intersect(c).is_some());
        }
    }

    #[test]
    fn subspace_projection_examples() {
        let rho = rho2();
        // d=2: unchanged
        let h = ChebSeries::basis(2, Parity::Even, P, rho.clone());
        let out = project_degree_subspace(&h, 2).unwrap();
        assert_eq!(out.coeffs().len(), h.coeffs().len());
        // h = T_2 (h''(0) = 4), d=4: output has h''(0) exactly zero
        let out = project_degree_subspace(&h, 4).unwrap();
        let dd = out.even_second_derivative_at_zero();
        assert!(dd.is_point() && dd.contains_zero());
        // a candidate already in the subspace passes through unchanged
        let out2 = project_degree_subspace(&out, 4).unwrap();
        for (a, b) in out.coeffs().iter().zip(out2.coeffs()) {
            assert!(a.lo() == b.lo() && a.hi() == b.hi());
        }
    }

    #[test]
    fn ball_chain_widens_with_radius() {
        let rho = rho2();
        let h = ChebSeries::new(
            vec![
                Scalar::from_f64(0.56, P),
                Scalar::from_f64(-0.32, P),
                Scalar::from_f64(0.015, P),
            ],
            Parity::Even,
            rho.clone(),
        );
        let cand = CandidatePair::new(Scalar::from_f64(-0.39, P), h);
        let pts = vec![Scalar::from_ratio(1, 3, P)];
        let small = ChainCtx::ball(2, &cand, &rho, &Float::with_val(P, 1e-12));
        let big = ChainCtx::ball(2, &cand, &rho, &Float::with_val(P, 1e-6));
        let cs = build_node_chain(&small, &pts).unwrap();
        let cb = build_node_chain(&big, &pts).unwrap();
        assert!(cb.delta[2][0].contains(&cs.delta[2][0]));
        assert!(cb.xi[0][0].contains(&cs.xi[0][0]));
        assert!(cb.xi[0][0].width_upper() > cs.xi[0][0].width_upper());
    }
}
