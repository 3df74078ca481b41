//! The Newton-Kantorovich certificate engine: defect (Y) and contraction
//! (Z) bounds for the fixed-point problem, their analogues (Y, Z1, Z2) for
//! the eigenvalue problem, and the assembly of certificates with refined
//! enclosures of the universal constants.

use crate::cheb::{ChebSeries, DctPlan};
use crate::ellipse::{adaptive_sup_theta, SupBound, Symmetry};
use crate::error::{Error, Result};
use crate::estimates::{coeff_decay_bounds, optimize_param, upsilon_01, upsilon_10};
use crate::linalg::{space_weights, weighted_op_norm, weighted_vec_norm, FMat, IvMat};
use crate::operator::{
    beta_of_real_extent, build_dr_data, build_node_chain, closures, df_matrix, dphi_matrix,
    phi_values, CandidatePair, ChainCtx, DrData, RenormProblem,
};
use crate::scalar::Scalar;
use rug::Float;

/// Tuning parameters of the certificate computation. All of them only
/// affect tightness, never validity.
#[derive(Clone, Debug)]
pub struct CertSettings {
    /// Interpolation order of the defect splitting (defaults to 4k).
    pub k_y: Option<usize>,
    /// Candidate count of the nu scans.
    pub scan_candidates: usize,
    /// Candidate count of the per-j gamma/mu grids (each grid point costs
    /// one inclusion supremum plus one magnitude supremum).
    pub gamma_candidates: usize,
    /// Scan upper limits as multiples of rho.
    pub nu_factor: f64,
    /// Relative tolerance of final boundary suprema.
    pub sup_tol: f64,
    /// Relative tolerance of suprema during parameter scans.
    pub scan_tol: f64,
    pub depth_cap: u32,
    /// Piece budgets of the boundary subdivisions (scan phase / final).
    pub scan_budget: usize,
    pub sup_budget: usize,
    /// Relative tolerance of the focal-distance (inclusion) suprema; these
    /// are smooth and cheap, and the Upsilon constants are very sensitive
    /// to the resulting radii, so keep them sharp even while scanning.
    pub eta_tol: f64,
}

impl Default for CertSettings {
    fn default() -> Self {
        CertSettings {
            k_y: None,
            scan_candidates: 32,
            gamma_candidates: 10,
            nu_factor: 4.0,
            sup_tol: 1e-3,
            scan_tol: 0.25,
            depth_cap: 40,
            scan_budget: 192,
            sup_budget: 4096,
            eta_tol: 0.01,
        }
    }
}

impl CertSettings {
    pub fn k_y_order(&self, p: &RenormProblem) -> usize {
        let ky = self.k_y.unwrap_or(4 * p.k);
        // needs to exceed the proof order and be even
        (ky.max(p.order() + 2) + 1) & !1usize
    }
}

#[derive(Clone, Debug)]
pub enum BoundSet {
    FixedPoint {
        y_k: Float,
        y_inf: Float,
        z_kk: Float,
        z_kinf: Float,
        z_inf: Float,
    },
    Eigen {
        y_k: Float,
        y_inf: Float,
        z1_kk: Float,
        z1_kinf: Float,
        z1_inf: Float,
        z2: Float,
    },
}

/// Outcome of one Newton-Kantorovich validation.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub bounds: BoundSet,
    pub r_star: Float,
    pub r_min: Option<Float>,
    pub success: bool,
    pub k_y: usize,
    /// record of the tuning parameters chosen by the scans
    pub nu_choices: Vec<(String, f64)>,
    /// refined enclosure of the scalar component (alpha resp. lambda)
    pub refined: Option<Scalar>,
}

impl Certificate {
    pub fn component(&self, name: &str) -> Option<f64> {
        match &self.bounds {
            BoundSet::FixedPoint {
                y_k,
                y_inf,
                z_kk,
                z_kinf,
                z_inf,
            } => match name {
                "Y_K" => Some(y_k.to_f64()),
                "Y_inf" => Some(y_inf.to_f64()),
                "Z_KK" => Some(z_kk.to_f64()),
                "Z_Kinf" => Some(z_kinf.to_f64()),
                "Z_inf" => Some(z_inf.to_f64()),
                _ => None,
            },
            BoundSet::Eigen {
                y_k,
                y_inf,
                z1_kk,
                z1_kinf,
                z1_inf,
                z2,
            } => match name {
                "Y_K" => Some(y_k.to_f64()),
                "Y_inf" => Some(y_inf.to_f64()),
                "Z1_KK" => Some(z1_kk.to_f64()),
                "Z1_Kinf" => Some(z1_kinf.to_f64()),
                "Z1_inf" => Some(z1_inf.to_f64()),
                "Z2" => Some(z2.to_f64()),
                _ => None,
            },
        }
    }
}

/// Approximate eigenpair together with its certificate.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: Scalar,
    pub u: ChebSeries,
    pub certificate: Certificate,
}

fn upper(x: &Scalar) -> Float {
    x.mag_upper()
}

/// J Pi^N Phi(alpha, h) and its weighted norm; also returns the raw
/// J-image vector for the refined alpha enclosure.
struct FiniteDefect {
    norm: Scalar,
    j_image: Vec<Scalar>,
}

fn finite_defect(
    j_iv: &IvMat,
    phase: &Scalar,
    series: &ChebSeries,
    weights: &[Scalar],
) -> FiniteDefect {
    let mut vec = Vec::with_capacity(series.len() + 1);
    vec.push(phase.clone());
    vec.extend(series.coeffs().iter().cloned());
    let image = j_iv.mat_vec(&vec);
    FiniteDefect {
        norm: weighted_vec_norm(&image, weights),
        j_image: image,
    }
}

/// l1 norm of the difference between two even coefficient enclosures
/// (the shorter one padded with zeros).
fn diff_ell1_norm(a: &ChebSeries, b: &ChebSeries, rho: &Scalar) -> Scalar {
    let n = a.len().max(b.len());
    a.pad_to(n).sub(&b.pad_to(n)).ell1_norm_at(rho)
}

/// Defect bounds for the fixed-point problem. Returns (Y_K, Y_inf) as
/// enclosures together with the J-image vector and the nu record.
pub struct YBoundFp {
    pub y_k: Scalar,
    pub y_inf: Scalar,
    pub j_image: Vec<Scalar>,
    pub nu: f64,
}

pub fn y_bound_fp(
    p: &RenormProblem,
    cand: &CandidatePair,
    j: &FMat,
    settings: &CertSettings,
) -> Result<YBoundFp> {
    let prec = p.prec;
    let rho = &p.rho;
    let ctx = ChainCtx::point(p.m, cand, rho);
    let k_y = settings.k_y_order(p);
    let plan_n = DctPlan::new(p.k, prec);
    let plan_y = DctPlan::new(k_y / 2, prec);
    let weights = space_weights(rho, p.k + 2);

    // choose nu by minimizing Upsilon^{1,0,even}_{rho,nu,K_Y} * sup|phi| on E_nu
    let rho_f = rho.mid().to_f64();
    let sup_phi_at = |nu_f: f64, tol: f64, budget: usize| -> Result<SupBound> {
        let nu = Scalar::from_f64(nu_f, prec);
        adaptive_sup_theta(
            prec,
            Symmetry::Quarter,
            tol,
            settings.depth_cap,
            budget,
            &closures::phi_abs(&ctx, nu.clone()),
        )
    };
    let nu_star = optimize_param(
        rho_f * (1.0 + 1e-6),
        rho_f * settings.nu_factor,
        settings.scan_candidates,
        |nu_f| {
            let nu = Scalar::from_f64(nu_f, prec);
            let ups = upsilon_10(rho, &nu, k_y, true).ok()?;
            let sup = sup_phi_at(nu_f, settings.scan_tol, settings.scan_budget).ok()?;
            Some(ups.hi().to_f64() * sup.upper.to_f64())
        },
    )
    .ok_or_else(|| Error::InclusionFailure("no admissible nu for the defect tail".into()))?;
    let nu = Scalar::from_f64(nu_star, prec);
    let sup_phi = sup_phi_at(nu_star, settings.sup_tol, settings.sup_budget)?;
    let c0 = Scalar::point(sup_phi.upper.clone());
    let ups = upsilon_10(rho, &nu, k_y, true)?;

    // coefficient enclosures of the two interpolants, with the decay
    // refinement from the C0 bound on E_nu
    let decay_n = coeff_decay_bounds(&c0, &nu, p.order())?;
    let decay_y = coeff_decay_bounds(&c0, &nu, k_y)?;
    let values_n = phi_values(&ctx, plan_n.nodes_even())?;
    let series_n = crate::operator::project_with_decay(&plan_n, &values_n, rho.clone(), Some(&decay_n));
    let values_y = phi_values(&ctx, plan_y.nodes_even())?;
    let series_y = crate::operator::project_with_decay(&plan_y, &values_y, rho.clone(), Some(&decay_y));

    let phase = cand.h.eval_s(&Scalar::zero(prec)).sub(&Scalar::one(prec));
    let j_iv = IvMat::from_point(j);
    let fin = finite_defect(&j_iv, &phase, &series_n, &weights);

    let alpha_mag = Scalar::point(cand.alpha.mig_lower());
    let diff = diff_ell1_norm(&series_y, &series_n, rho);
    let y_inf = diff.add(&ups.mul(&c0)).checked_div(&alpha_mag)?;
    Ok(YBoundFp {
        y_k: fin.norm,
        y_inf,
        j_image: fin.j_image,
        nu: nu_star,
    })
}

/// ||I - J Pi DPhi(ball) Pi|| on the weighted space.
pub fn z_bound_kk(
    p: &RenormProblem,
    cand: &CandidatePair,
    j: &FMat,
    r_star: &Float,
) -> Result<Scalar> {
    let prec = p.prec;
    let plan = DctPlan::new(p.k, prec);
    let weights = space_weights(&p.rho, p.k + 2);
    let ctx = ChainCtx::ball(p.m, cand, &p.rho, r_star);
    let cols = dphi_matrix(&ctx, &plan, &p.rho)?;
    let jb = IvMat::from_columns(cols);
    let j_iv = IvMat::from_point(j);
    let m = IvMat::identity(p.k + 2, prec).sub(&j_iv.mul(&jb));
    weighted_op_norm(&m, &weights)
}

/// Per-mode tail coefficient bounds (ZK1/ZK2 combined), multiplied by |J|
/// and measured in the weighted norm.
pub struct ZKinfBound {
    pub value: Scalar,
    pub gammas: Vec<(String, f64)>,
}

pub fn z_bound_kinf(
    p: &RenormProblem,
    cand: &CandidatePair,
    j: &FMat,
    r_star: &Float,
    settings: &CertSettings,
) -> Result<ZKinfBound> {
    let prec = p.prec;
    let rho = &p.rho;
    let order = p.order();
    let m = p.m as usize;
    let plan = DctPlan::new(p.k, prec);
    let weights = space_weights(rho, p.k + 2);
    let ctx = ChainCtx::ball(p.m, cand, rho, r_star);
    let chain = build_node_chain(&ctx, plan.nodes_even())?;
    let one = Scalar::one(prec);
    let mut gammas = Vec::new();

    // first estimate: Upsilon^{0,1,even}_{beta,rho,order} |M^{-1}| sum_j |gtilde_j|
    let est1: Option<Vec<Scalar>> = {
        let mut s_max = Float::with_val(prec, 0);
        for j_idx in 0..m {
            for v in &chain.delta[j_idx] {
                let mag = v.mag_upper();
                if mag > s_max {
                    s_max = mag;
                }
            }
        }
        let beta = beta_of_real_extent(&Scalar::point(s_max));
        if beta.hi() <= rho.lo() {
            let ups = upsilon_01(&beta, rho, order, true)?;
            let mut sums: Vec<Scalar> = vec![Scalar::zero(prec); p.k + 1];
            for j_idx in 0..m {
                for (i, g) in chain.gtilde(j_idx).iter().enumerate() {
                    sums[i] = sums[i].add(&g.abs());
                }
            }
            let coeffs = plan.abs_inv_apply(&sums);
            Some(coeffs.into_iter().map(|c| c.mul(&ups)).collect())
        } else {
            None
        }
    };

    // second estimate, per j, optimized over gamma independently per mode
    let rho_f = rho.mid().to_f64();
    let mut est2: Option<Vec<Scalar>> = Some(vec![Scalar::zero(prec); p.k + 1]);
    for j_idx in 0..m {
        let mut per_mode_min: Option<Vec<Scalar>> = None;
        let mut best_gamma = f64::NAN;
        let candidates: Vec<f64> = (0..settings.gamma_candidates)
            .map(|i| {
                let t = (i as f64 + 1.0) / settings.gamma_candidates as f64;
                rho_f * (1.0 + 1e-9) * (settings.nu_factor.ln() * t).exp()
            })
            .collect();
        for &gamma_f in &candidates {
            let gamma = Scalar::from_f64(gamma_f, prec);
            // beta_j(gamma) from the focal-distance functional of delta_j
            let eta = match adaptive_sup_theta(
                prec,
                Symmetry::Quarter,
                settings.eta_tol,
                settings.depth_cap,
                settings.sup_budget,
                &closures::delta_eta(&ctx, gamma.clone(), j_idx),
            ) {
                Ok(b) => b,
                Err(_) => continue,
            };
            let eta_up = Scalar::point(eta.upper.clone()).max_iv(&Scalar::from_i(2, prec));
            let beta = eta_up
                .add(&eta_up.square().sub(&Scalar::from_i(4, prec)).sqrt_clamped())
                .mul_2exp(-1);
            let beta = Scalar::point(beta.hi().clone());
            if !(beta.hi() <= rho.lo()) {
                continue; // inclusion into E_rho failed at this gamma
            }
            let gsup = match adaptive_sup_theta(
                prec,
                Symmetry::Quarter,
                settings.scan_tol,
                settings.depth_cap,
                settings.scan_budget,
                &closures::gtilde_abs(&ctx, gamma.clone(), j_idx),
            ) {
                Ok(b) => Scalar::point(b.upper),
                Err(_) => continue,
            };
            let ups = match upsilon_01(&beta, rho, order, true) {
                Ok(u) => u,
                Err(_) => continue,
            };
            let decay = coeff_decay_bounds(&one, &gamma, order)?;
            let factor = ups.mul(&gsup);
            let vec_g: Vec<Scalar> = (0..=p.k).map(|i| factor.mul(&decay[2 * i])).collect();
            per_mode_min = Some(match per_mode_min {
                None => {
                    best_gamma = gamma_f;
                    vec_g
                }
                Some(prev) => {
                    let better = vec_g
                        .iter()
                        .zip(prev.iter())
                        .filter(|(a, b)| a.hi() < b.hi())
                        .count();
                    if better > (p.k + 1) / 2 {
                        best_gamma = gamma_f;
                    }
                    prev.iter().zip(vec_g.iter()).map(|(a, b)| a.min_iv(b)).collect()
                }
            });
        }
        match (per_mode_min, est2.take()) {
            (Some(v), Some(acc)) => {
                gammas.push((format!("gamma_{j_idx}"), best_gamma));
                est2 = Some(acc.iter().zip(v.iter()).map(|(a, b)| a.add(b)).collect());
            }
            _ => {
                est2 = None;
                break;
            }
        }
    }

    // combine component-wise
    let combined: Vec<Scalar> = match (est1, est2) {
        (Some(a), Some(b)) => a.iter().zip(b.iter()).map(|(x, y)| x.min_iv(y)).collect(),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(Error::InclusionFailure(
                "no admissible tail-column estimate".into(),
            ))
        }
    };
    let mut vec = Vec::with_capacity(p.k + 2);
    vec.push(Scalar::zero(prec)); // zero is a node, so the phase entry vanishes
    vec.extend(combined);
    let j_iv = IvMat::from_point(j);
    let image = j_iv.abs_mat_vec(&vec);
    Ok(ZKinfBound {
        value: weighted_vec_norm(&image, &weights),
        gammas,
    })
}

/// Tail block bound: (max[Ups_nu ||ftilde||_nu, sum_j Ups_mu_j ||gtilde_j||_mu_j] + r*)/|alpha|.
pub struct ZInfBound {
    pub value: Scalar,
    pub choices: Vec<(String, f64)>,
}

pub fn z_bound_inf(
    p: &RenormProblem,
    cand: &CandidatePair,
    r_star: &Float,
    settings: &CertSettings,
) -> Result<ZInfBound> {
    let prec = p.prec;
    let rho = &p.rho;
    let order = p.order();
    let m = p.m as usize;
    let ctx = ChainCtx::ball(p.m, cand, rho, r_star);
    let rho_f = rho.mid().to_f64();
    let mut choices = Vec::new();

    // ftilde term over E_nu
    let obj_f = |nu_f: f64, tol: f64, budget: usize| -> Result<Scalar> {
        let nu = Scalar::from_f64(nu_f, prec);
        let ups = upsilon_10(rho, &nu, order, true)?;
        let sup = adaptive_sup_theta(
            prec,
            Symmetry::Quarter,
            tol,
            settings.depth_cap,
            budget,
            &closures::ftilde_abs(&ctx, nu.clone()),
        )?;
        Ok(ups.mul(&Scalar::point(sup.upper)))
    };
    let nu_star = optimize_param(
        rho_f * (1.0 + 1e-6),
        rho_f * settings.nu_factor,
        settings.scan_candidates,
        |nu_f| obj_f(nu_f, settings.scan_tol, settings.scan_budget).ok().map(|s| s.hi().to_f64()),
    )
    .ok_or_else(|| Error::InclusionFailure("no admissible nu for the ftilde term".into()))?;
    choices.push(("nu_ftilde".into(), nu_star));
    let f_term = obj_f(nu_star, settings.sup_tol, settings.sup_budget)?;

    // gtilde terms: mu_j > rho with delta_j(E_mu_j) inside E_rho
    let mut g_term = Scalar::zero(prec);
    for j_idx in 0..m {
        let obj_g = |mu_f: f64, tol: f64, budget: usize| -> Result<Scalar> {
            let mu = Scalar::from_f64(mu_f, prec);
            // inclusion check
            let eta = adaptive_sup_theta(
                prec,
                Symmetry::Quarter,
                settings.eta_tol,
                settings.depth_cap,
                settings.sup_budget,
                &closures::delta_eta(&ctx, mu.clone(), j_idx),
            )?;
            let semi = rho.add(&rho.recip()?);
            if !(Scalar::point(eta.upper.clone()).hi() <= semi.lo()) {
                return Err(Error::InclusionFailure(format!(
                    "delta_{j_idx}(E_mu) not inside E_rho at mu={mu_f}"
                )));
            }
            let ups = upsilon_10(rho, &mu, order, true)?;
            let sup = adaptive_sup_theta(
                prec,
                Symmetry::Quarter,
                tol,
                settings.depth_cap,
                budget,
                &closures::gtilde_abs(&ctx, mu.clone(), j_idx),
            )?;
            Ok(ups.mul(&Scalar::point(sup.upper)))
        };
        let mu_star = grid_best(
            rho_f * (1.0 + 1e-6),
            rho_f * settings.nu_factor,
            settings.gamma_candidates,
            |mu_f| obj_g(mu_f, settings.scan_tol, settings.scan_budget).ok().map(|s| s.hi().to_f64()),
        )
        .ok_or_else(|| {
            Error::InclusionFailure(format!("no admissible mu for gtilde_{j_idx}"))
        })?;
        choices.push((format!("mu_{j_idx}"), mu_star));
        g_term = g_term.add(&obj_g(mu_star, settings.sup_tol, settings.sup_budget)?);
    }

    let r_iv = Scalar::point(r_star.clone());
    let alpha_mag = Scalar::point(cand.alpha.mig_lower());
    let value = f_term.max_iv(&g_term).add(&r_iv).checked_div(&alpha_mag)?;
    Ok(ZInfBound { value, choices })
}


/// Evaluate the objective on a log-spaced grid and return the best finite
/// candidate (used where each probe costs boundary suprema).
fn grid_best(lo: f64, hi: f64, n: usize, mut obj: impl FnMut(f64) -> Option<f64>) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n {
        let t = (i as f64 + 1.0) / n as f64;
        let x = lo * ((hi / lo).ln() * t).exp();
        if let Some(v) = obj(x) {
            if v.is_finite() && best.map_or(true, |(_, bv)| v < bv) {
                best = Some((x, v));
            }
        }
    }
    best.map(|(x, _)| x)
}

/// Full fixed-point certification: assembles Y and Z, applies the
/// contraction theorem, and refines the alpha enclosure through one
/// application of the fixed-point operator.
pub fn certify_fixed_point(
    p: &RenormProblem,
    cand: &CandidatePair,
    settings: &CertSettings,
) -> Result<Certificate> {
    let prec = p.prec;
    let plan = DctPlan::new(p.k, prec);
    // approximate inverse of the midpoint Jacobian
    let ctx = ChainCtx::point(p.m, cand, &p.rho);
    let cols = dphi_matrix(&ctx, &plan, &p.rho)?;
    let n = cols.len();
    let mut jm = FMat::zeros(n, prec);
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            *jm.at_mut(r, c) = v.mid();
        }
    }
    let j = jm.inverse()?;

    let yb = y_bound_fp(p, cand, &j, settings)?;
    let zkk = z_bound_kk(p, cand, &j, &p.r_star)?;
    let zkinf = z_bound_kinf(p, cand, &j, &p.r_star, settings)?;
    let zinf = z_bound_inf(p, cand, &p.r_star, settings)?;

    let y = yb.y_k.add(&yb.y_inf);
    let z = zkk.add(&zkinf.value).add(&zinf.value);
    let one = Scalar::one(prec);
    let mut nu_choices = vec![("nu_defect".to_string(), yb.nu)];
    nu_choices.extend(zkinf.gammas.clone());
    nu_choices.extend(zinf.choices.clone());

    let mut success = false;
    let mut r_min = None;
    let mut refined = None;
    if z.hi() < one.lo() {
        let r = y.checked_div(&one.sub(&z))?;
        let r_up = upper(&r);
        if r_up <= p.r_star {
            success = true;
            // refined alpha: alpha* in alpha - [J Phi]_alpha +- Z r_min
            let corr = &yb.j_image[0];
            let zr = upper(&z.mul(&r));
            refined = Some(cand.alpha.sub(corr).inflate(&zr));
        }
        r_min = Some(r_up);
    }
    Ok(Certificate {
        bounds: BoundSet::FixedPoint {
            y_k: upper(&yb.y_k),
            y_inf: upper(&yb.y_inf),
            z_kk: upper(&zkk),
            z_kinf: upper(&zkinf.value),
            z_inf: upper(&zinf.value),
        },
        r_star: p.r_star.clone(),
        r_min,
        success,
        k_y: settings.k_y_order(p),
        nu_choices,
        refined,
    })
}

/// Defect bounds for the eigenvalue problem at the stored candidate data.
struct YBoundEig {
    y_k: Scalar,
    y_inf: Scalar,
    j_image: Vec<Scalar>,
    nu: f64,
}

fn y_bound_eig(
    p: &RenormProblem,
    ctx: &ChainCtx,
    data: &DrData,
    lambda: &Scalar,
    u: &ChebSeries,
    j: &FMat,
    settings: &CertSettings,
) -> Result<YBoundEig> {
    let prec = p.prec;
    let rho = &p.rho;
    let k_y = settings.k_y_order(p);
    let plan_n = DctPlan::new(p.k, prec);
    let plan_y = DctPlan::new(k_y / 2, prec);
    let weights = space_weights(rho, p.k + 2);
    let rho_f = rho.mid().to_f64();

    // s0 = sum_j xi_{j+1}(0) u(delta_j(0))
    let m = p.m as usize;
    let mut s0 = Scalar::zero(prec);
    for j_idx in 0..m {
        s0 = s0.add(&data.xi0[j_idx].mul(&u.eval_s(&data.chain.delta[j_idx][0])));
    }

    let sup_dru = |nu_f: f64, tol: f64, budget: usize| -> Result<SupBound> {
        let nu = Scalar::from_f64(nu_f, prec);
        adaptive_sup_theta(
            prec,
            Symmetry::Quarter,
            tol,
            settings.depth_cap,
            budget,
            &closures::dr_apply_abs(ctx, nu.clone(), u, data.dm0.clone(), s0.clone()),
        )
    };
    let lambda_mag = Scalar::point(lambda.mig_lower());
    let nu_star = optimize_param(
        rho_f * (1.0 + 1e-6),
        rho_f * settings.nu_factor,
        settings.scan_candidates,
        |nu_f| {
            let nu = Scalar::from_f64(nu_f, prec);
            let ups = upsilon_10(rho, &nu, k_y, true).ok()?;
            let sup = sup_dru(nu_f, settings.scan_tol, settings.scan_budget).ok()?;
            Some(ups.hi().to_f64() * sup.upper.to_f64())
        },
    )
    .ok_or_else(|| Error::InclusionFailure("no admissible nu for the eigen defect".into()))?;
    let nu = Scalar::from_f64(nu_star, prec);
    let sup = sup_dru(nu_star, settings.sup_tol, settings.sup_budget)?;
    let c0 = Scalar::point(sup.upper.clone());
    let ups = upsilon_10(rho, &nu, k_y, true)?;

    // residual interpolants at both orders: DR u - lambda u
    let resid_series = |plan: &DctPlan| -> Result<ChebSeries> {
        let chain_ctx_points = plan.nodes_even();
        let local = build_dr_data(ctx, chain_ctx_points)?;
        let values = crate::operator::dr_apply_values(ctx, &local, u)?;
        let resid: Vec<Scalar> = values
            .iter()
            .zip(chain_ctx_points.iter())
            .map(|(v, x)| v.sub(&lambda.mul(&u.eval_s(x))))
            .collect();
        // decay refinement: |DR u - lambda u| on E_nu <= c0 + |lambda| ||u||_nu
        let u_nu = u.ell1_norm_at(&nu);
        let c0_res = c0.add(&lambda.abs().mul(&u_nu));
        let decay = coeff_decay_bounds(&c0_res, &nu, 2 * plan.k())?;
        Ok(crate::operator::project_with_decay(
            plan,
            &resid,
            rho.clone(),
            Some(&decay),
        ))
    };
    let series_n = resid_series(&plan_n)?;
    let series_y = resid_series(&plan_y)?;

    let phase = u.coeff(0).sub(&Scalar::one(prec));
    let j_iv = IvMat::from_point(j);
    let fin = finite_defect(&j_iv, &phase, &series_n, &weights);
    let diff = diff_ell1_norm(&series_y, &series_n, rho);
    let y_inf = diff.add(&ups.mul(&c0)).checked_div(&lambda_mag)?;
    Ok(YBoundEig {
        y_k: fin.norm,
        y_inf,
        j_image: fin.j_image,
        nu: nu_star,
    })
}

struct Z1Bounds {
    z1_kk: Scalar,
    z1_kinf: Scalar,
    z1_inf: Scalar,
    choices: Vec<(String, f64)>,
}

fn z1_bounds_eig(
    p: &RenormProblem,
    ctx: &ChainCtx,
    data: &DrData,
    lambda: &Scalar,
    u: &ChebSeries,
    j: &FMat,
    settings: &CertSettings,
) -> Result<Z1Bounds> {
    let prec = p.prec;
    let rho = &p.rho;
    let order = p.order();
    let m = p.m as usize;
    let plan = DctPlan::new(p.k, prec);
    let weights = space_weights(rho, p.k + 2);
    let one = Scalar::one(prec);
    let rho_f = rho.mid().to_f64();
    let mut choices = Vec::new();

    // Z1^{K,K}: finite-block residual at the point data
    let cols = df_matrix(ctx, data, lambda, u, &plan, rho)?;
    let dfb = IvMat::from_columns(cols);
    let j_iv = IvMat::from_point(j);
    let mres = IvMat::identity(p.k + 2, prec).sub(&j_iv.mul(&dfb));
    let z1_kk = weighted_op_norm(&mres, &weights)?;

    // Z1^{K,inf}: phase entry rho^{-2 order}; coefficient entries from the
    // two tail estimates
    let rho_pow = rho.pow_u(2 * order as u32).recip()?;
    // first estimate: orbit values at the nodes
    let est1: Option<Vec<Scalar>> = {
        let mut s_max = Float::with_val(prec, 0);
        for j_idx in 0..m {
            for v in &data.chain.delta[j_idx] {
                let mag = v.mag_upper();
                if mag > s_max {
                    s_max = mag;
                }
            }
        }
        let beta = beta_of_real_extent(&Scalar::point(s_max));
        if beta.hi() <= rho.lo() {
            let ups = upsilon_01(&beta, rho, order, true)?;
            let mut sums: Vec<Scalar> = vec![Scalar::zero(prec); p.k + 1];
            for j_idx in 0..m {
                for (i, xi) in data.chain.xi[j_idx + 1].iter().enumerate() {
                    let t = xi.abs().add(&data.weight[i].mul(&data.xi0[j_idx]).abs());
                    sums[i] = sums[i].add(&t);
                }
            }
            let coeffs = plan.abs_inv_apply(&sums);
            let dm0_mag = Scalar::point(data.dm0.mig_lower());
            Some(
                coeffs
                    .into_iter()
                    .map(|c| c.mul(&ups).checked_div(&dm0_mag))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        }
    };
    // second estimate: gamma-based decay, per j plus the shared weight term
    let est2: Option<Vec<Scalar>> = (|| -> Result<Option<Vec<Scalar>>> {
        let dm0_mag = Scalar::point(data.dm0.mig_lower());
        let mut acc = vec![Scalar::zero(prec); p.k + 1];
        let candidates: Vec<f64> = (0..settings.gamma_candidates)
            .map(|i| {
                let t = (i as f64 + 1.0) / settings.gamma_candidates as f64;
                rho_f * (1.0 + 1e-9) * (settings.nu_factor.ln() * t).exp()
            })
            .collect();
        for j_idx in 0..m {
            let mut per_mode: Option<Vec<Scalar>> = None;
            for &gamma_f in &candidates {
                let gamma = Scalar::from_f64(gamma_f, prec);
                let eta = match adaptive_sup_theta(
                    prec,
                    Symmetry::Quarter,
                    settings.eta_tol,
                    settings.depth_cap,
                    settings.sup_budget,
                    &closures::delta_eta(ctx, gamma.clone(), j_idx),
                ) {
                    Ok(b) => b,
                    Err(_) => continue,
                };
                let eta_up = Scalar::point(eta.upper.clone()).max_iv(&Scalar::from_i(2, prec));
                let beta = eta_up
                    .add(&eta_up.square().sub(&Scalar::from_i(4, prec)).sqrt_clamped())
                    .mul_2exp(-1);
                let beta = Scalar::point(beta.hi().clone());
                if !(beta.hi() <= rho.lo()) {
                    continue;
                }
                let xsup = match adaptive_sup_theta(
                    prec,
                    Symmetry::Quarter,
                    settings.scan_tol,
                    settings.depth_cap,
                    settings.scan_budget,
                    &closures::xi_abs(ctx, gamma.clone(), j_idx + 1),
                ) {
                    Ok(b) => Scalar::point(b.upper),
                    Err(_) => continue,
                };
                let ups = match upsilon_01(&beta, rho, order, true) {
                    Ok(u) => u,
                    Err(_) => continue,
                };
                let decay = coeff_decay_bounds(&one, &gamma, order)?;
                let factor = ups.mul(&xsup);
                let v: Vec<Scalar> = (0..=p.k).map(|i| factor.mul(&decay[2 * i])).collect();
                per_mode = Some(match per_mode {
                    None => v,
                    Some(prev) => prev.iter().zip(v.iter()).map(|(a, b)| a.min_iv(b)).collect(),
                });
            }
            match per_mode {
                Some(v) => {
                    for (a, b) in acc.iter_mut().zip(v.iter()) {
                        *a = a.add(b);
                    }
                }
                None => return Ok(None),
            }
        }
        // shared term: |xi_{j+1}(0)| sum times the weight function on E_gamma
        let mut xi0_sum = Scalar::zero(prec);
        for j_idx in 0..m {
            xi0_sum = xi0_sum.add(&data.xi0[j_idx].abs());
        }
        let mut weight_vec: Option<Vec<Scalar>> = None;
        for &gamma_f in &candidates {
            let gamma = Scalar::from_f64(gamma_f, prec);
            let wsup = match adaptive_sup_theta(
                prec,
                Symmetry::Quarter,
                settings.scan_tol,
                settings.depth_cap,
                settings.scan_budget,
                &closures::dr_weight_abs(ctx, gamma.clone(), data.dm0.clone()),
            ) {
                Ok(b) => Scalar::point(b.upper),
                Err(_) => continue,
            };
            let ups_one = upsilon_01(&one, rho, order, true)?;
            let decay = coeff_decay_bounds(&one, &gamma, order)?;
            let factor = ups_one.mul(&wsup).mul(&xi0_sum);
            let v: Vec<Scalar> = (0..=p.k).map(|i| factor.mul(&decay[2 * i])).collect();
            weight_vec = Some(match weight_vec {
                None => v,
                Some(prev) => prev.iter().zip(v.iter()).map(|(a, b)| a.min_iv(b)).collect(),
            });
        }
        match weight_vec {
            Some(v) => {
                for (a, b) in acc.iter_mut().zip(v.iter()) {
                    *a = a.add(b);
                }
            }
            None => return Ok(None),
        }
        Ok(Some(
            acc.into_iter()
                .map(|c| c.checked_div(&dm0_mag))
                .collect::<Result<Vec<_>>>()?,
        ))
    })()?;

    let combined: Vec<Scalar> = match (est1, est2) {
        (Some(a), Some(b)) => a.iter().zip(b.iter()).map(|(x, y)| x.min_iv(y)).collect(),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(Error::InclusionFailure(
                "no admissible eigen tail-column estimate".into(),
            ))
        }
    };
    let mut vec = Vec::with_capacity(p.k + 2);
    vec.push(rho_pow);
    vec.extend(combined);
    let image = j_iv.abs_mat_vec(&vec);
    let z1_kinf = weighted_vec_norm(&image, &weights);

    // Z1^inf
    let mut xi_terms = Scalar::zero(prec);
    for j_idx in 0..m {
        let obj = |mu_f: f64, tol: f64, budget: usize| -> Result<Scalar> {
            let mu = Scalar::from_f64(mu_f, prec);
            let eta = adaptive_sup_theta(
                prec,
                Symmetry::Quarter,
                settings.eta_tol,
                settings.depth_cap,
                settings.sup_budget,
                &closures::delta_eta(ctx, mu.clone(), j_idx),
            )?;
            let semi = rho.add(&rho.recip()?);
            if !(Scalar::point(eta.upper.clone()).hi() <= semi.lo()) {
                return Err(Error::InclusionFailure(format!(
                    "delta_{j_idx}(E_mu) not inside E_rho at mu={mu_f}"
                )));
            }
            let ups = upsilon_10(rho, &mu, order, true)?;
            let sup = adaptive_sup_theta(
                prec,
                Symmetry::Quarter,
                tol,
                settings.depth_cap,
                budget,
                &closures::xi_abs(ctx, mu.clone(), j_idx + 1),
            )?;
            Ok(ups.mul(&Scalar::point(sup.upper)))
        };
        let mu_star = grid_best(
            rho_f * (1.0 + 1e-6),
            rho_f * settings.nu_factor,
            settings.gamma_candidates,
            |mu_f| obj(mu_f, settings.scan_tol, settings.scan_budget).ok().map(|s| s.hi().to_f64()),
        )
        .ok_or_else(|| Error::InclusionFailure(format!("no admissible mu for xi_{j_idx}")))?;
        choices.push((format!("mu_eig_{j_idx}"), mu_star));
        xi_terms = xi_terms.add(&obj(mu_star, settings.sup_tol, settings.sup_budget)?);
    }
    // weight-function term
    let obj_w = |nu_f: f64, tol: f64, budget: usize| -> Result<Scalar> {
        let nu = Scalar::from_f64(nu_f, prec);
        let ups = upsilon_10(rho, &nu, order, true)?;
        let sup = adaptive_sup_theta(
            prec,
            Symmetry::Quarter,
            tol,
            settings.depth_cap,
            budget,
            &closures::dr_weight_abs(ctx, nu.clone(), data.dm0.clone()),
        )?;
        Ok(ups.mul(&Scalar::point(sup.upper)))
    };
    let nu_star = optimize_param(
        rho_f * (1.0 + 1e-6),
        rho_f * settings.nu_factor,
        settings.scan_candidates,
        |nu_f| obj_w(nu_f, settings.scan_tol, settings.scan_budget).ok().map(|s| s.hi().to_f64()),
    )
    .ok_or_else(|| Error::InclusionFailure("no admissible nu for the weight term".into()))?;
    choices.push(("nu_weight".into(), nu_star));
    let mut xi0_sum = Scalar::zero(prec);
    for j_idx in 0..m {
        xi0_sum = xi0_sum.add(&data.xi0[j_idx].abs());
    }
    let w_term = obj_w(nu_star, settings.sup_tol, settings.sup_budget)?.mul(&xi0_sum);
    let lam_dm0 = Scalar::point(lambda.mig_lower()).mul(&Scalar::point(data.dm0.mig_lower()));
    let z1_inf = xi_terms.add(&w_term).checked_div(&lam_dm0)?;

    Ok(Z1Bounds {
        z1_kk,
        z1_kinf,
        z1_inf,
        choices,
    })
}

/// Z2 = ||A||: the finite block acts through J, the tail through
/// -(1/lambda) Pi^inf; aliasing leaks at most rho^{-4} of the tail mass
/// back into the finite block.
fn z2_eig(p: &RenormProblem, j: &FMat, lambda: &Scalar) -> Result<Scalar> {
    let prec = p.prec;
    let weights = space_weights(&p.rho, p.k + 2);
    let j_iv = IvMat::from_point(j);
    let j_norm = weighted_op_norm(&j_iv, &weights)?;
    let alias = p.rho.pow_u(4).recip()?;
    let one = Scalar::one(prec);
    let lam = Scalar::point(lambda.mig_lower());
    let channel2 = j_norm
        .mul(&alias)
        .add(&one.add(&alias).checked_div(&lam)?);
    Ok(j_norm.max_iv(&channel2))
}

/// Eigenpair certification at the stored candidate data.
pub fn certify_eigenpair(
    p: &RenormProblem,
    cand: &CandidatePair,
    lambda: &Float,
    u: &ChebSeries,
    settings: &CertSettings,
) -> Result<Certificate> {
    let prec = p.prec;
    let plan = DctPlan::new(p.k, prec);
    let ctx = ChainCtx::point(p.m, &cand.to_point(), &p.rho);
    let data = build_dr_data(&ctx, plan.nodes_even())?;
    let lambda_s = Scalar::point(lambda.clone());
    let u = u.pad_to(p.k + 1);

    let cols = df_matrix(&ctx, &data, &lambda_s, &u, &plan, &p.rho)?;
    let n = cols.len();
    let mut jm = FMat::zeros(n, prec);
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            *jm.at_mut(r, c) = v.mid();
        }
    }
    let j = jm.inverse()?;

    let yb = y_bound_eig(p, &ctx, &data, &lambda_s, &u, &j, settings)?;
    let z1 = z1_bounds_eig(p, &ctx, &data, &lambda_s, &u, &j, settings)?;
    let z2 = z2_eig(p, &j, &lambda_s)?;

    let y = yb.y_k.add(&yb.y_inf);
    let z1_total = z1.z1_kk.add(&z1.z1_kinf).add(&z1.z1_inf);
    let one = Scalar::one(prec);
    let mut nu_choices = vec![("nu_eig_defect".to_string(), yb.nu)];
    nu_choices.extend(z1.choices.clone());

    // radius from the quadratic: smallest root of Z2 r^2 - (1-Z1) r + Y = 0
    let mut success = false;
    let mut r_min = None;
    let mut refined = None;
    if z1_total.hi() < one.lo() {
        let one_minus = one.sub(&z1_total);
        let disc = one_minus.square().sub(&y.mul(&z2).mul_2exp(2));
        if disc.lo() > &0 {
            let r = one_minus
                .sub(&disc.sqrt_clamped())
                .checked_div(&z2.mul_2exp(1))?;
            let r_up = upper(&r);
            // contraction at radius r: Z1 + Z2 r < 1
            let contraction = z1_total.add(&z2.mul(&r));
            if r_up <= p.r_star && contraction.hi() < one.lo() {
                success = true;
                let corr = &yb.j_image[0];
                let zr = upper(&contraction.mul(&r));
                refined = Some(Scalar::point(lambda.clone()).sub(corr).inflate(&zr));
            }
            r_min = Some(r_up);
        }
    }
    Ok(Certificate {
        bounds: BoundSet::Eigen {
            y_k: upper(&yb.y_k),
            y_inf: upper(&yb.y_inf),
            z1_kk: upper(&z1.z1_kk),
            z1_kinf: upper(&z1.z1_kinf),
            z1_inf: upper(&z1.z1_inf),
            z2: upper(&z2),
        },
        r_star: p.r_star.clone(),
        r_min,
        success,
        k_y: settings.k_y_order(p),
        nu_choices,
        refined,
    })
}

/// End-to-end eigen pipeline: approximate eigenpair plus certificate.
pub fn eigen_pipeline(
    p: &RenormProblem,
    cand: &CandidatePair,
    settings: &CertSettings,
) -> Result<EigenPair> {
    let (lambda, u) = crate::newton::eig_approx(p, cand)?;
    let certificate = certify_eigenpair(p, cand, &lambda, &u, settings)?;
    Ok(EigenPair {
        lambda: Scalar::point(lambda),
        u,
        certificate,
    })
}

/// Soundness surrogate: an enclosure of the zero-equivalence residual
/// (1/alpha) h^m(alpha x) - h(x) at a real point, for spot checks of
/// certified candidates.
pub fn renorm_identity_residual(
    p: &RenormProblem,
    cand: &CandidatePair,
    r: &Float,
    x: &Scalar,
) -> Result<Scalar> {
    let ctx = ChainCtx::ball(p.m, cand, &p.rho, r);
    let chain = build_node_chain(&ctx, &[x.clone()])?;
    let lhs = chain.delta[p.m as usize][0].checked_div(&ctx.alpha)?;
    Ok(lhs.sub(&ctx.eval_h_s(x)?))
}
