//! Interval Chebyshev series: evaluation, weighted `l^1` norms, exact
//! differentiation, and the transforms between coefficients and values at
//! Chebyshev nodes.
//!
//! Series follow the convention `h = h_0 + 2 sum_{k>=1} h_k T_k`. Even
//! series store only the even-index coefficients: entry `i` holds `h_{2i}`.
//! Since `T_{2i}(x) = T_i(2x^2 - 1)`, an even series in `x` is the same
//! coefficient vector read as a general series in `y = 2x^2 - 1`; the node
//! transforms below exploit this, so one matrix serves both parities.

use crate::error::{Error, Result};
use crate::scalar::{ComplexBox, Scalar};
use rug::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// Only even modes; entry i is the coefficient of T_{2i}.
    Even,
    /// Entry k is the coefficient of T_k.
    General,
}

impl Parity {
    pub fn stride(self) -> usize {
        match self {
            Parity::Even => 2,
            Parity::General => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChebSeries {
    coeffs: Vec<Scalar>,
    parity: Parity,
    rho: Scalar,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<Scalar>, parity: Parity, rho: Scalar) -> Self {
        assert!(!coeffs.is_empty());
        ChebSeries {
            coeffs,
            parity,
            rho,
        }
    }

    pub fn zero(parity: Parity, prec: u32, rho: Scalar) -> Self {
        ChebSeries::new(vec![Scalar::zero(prec)], parity, rho)
    }

    /// The basis polynomial T_mode as a series of the requested parity.
    pub fn basis(mode: usize, parity: Parity, prec: u32, rho: Scalar) -> Self {
        let stride = parity.stride();
        assert!(mode % stride == 0, "mode incompatible with parity");
        let idx = mode / stride;
        let mut coeffs = vec![Scalar::zero(prec); idx + 1];
        coeffs[idx] = if mode == 0 {
            Scalar::one(prec)
        } else {
            // h = h_0 + 2 sum h_k T_k, so T_mode has coefficient 1/2
            Scalar::one(prec).mul_2exp(-1)
        };
        ChebSeries::new(coeffs, parity, rho)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Vec<Scalar> {
        &mut self.coeffs
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn rho(&self) -> &Scalar {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        (self.coeffs.len() - 1) * self.parity.stride()
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.iter().map(|c| c.prec()).max().unwrap_or(64)
    }

    /// Coefficient of T_k (true mode index).
    pub fn coeff(&self, mode: usize) -> Scalar {
        let stride = self.parity.stride();
        if mode % stride != 0 {
            return Scalar::zero(self.prec());
        }
        match self.coeffs.get(mode / stride) {
            Some(c) => c.clone(),
            None => Scalar::zero(self.prec()),
        }
    }

    /// View as a general (stride one) coefficient vector.
    pub fn to_general(&self) -> ChebSeries {
        match self.parity {
            Parity::General => self.clone(),
            Parity::Even => {
                let p = self.prec();
                let mut coeffs = Vec::with_capacity(2 * self.coeffs.len() - 1);
                for (i, c) in self.coeffs.iter().enumerate() {
                    if i > 0 {
                        coeffs.push(Scalar::zero(p));
                    }
                    coeffs.push(c.clone());
                }
                ChebSeries::new(coeffs, Parity::General, self.rho.clone())
            }
        }
    }

    pub fn pad_to(&self, len: usize) -> ChebSeries {
        let mut out = self.clone();
        let p = self.prec();
        while out.coeffs.len() < len {
            out.coeffs.push(Scalar::zero(p));
        }
        out
    }

    pub fn add(&self, other: &ChebSeries) -> ChebSeries {
        assert_eq!(self.parity, other.parity);
        let n = self.len().max(other.len());
        let a = self.pad_to(n);
        let b = other.pad_to(n);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(x, y)| x.add(y))
            .collect();
        ChebSeries::new(coeffs, self.parity, self.rho.clone())
    }

    pub fn sub(&self, other: &ChebSeries) -> ChebSeries {
        assert_eq!(self.parity, other.parity);
        let n = self.len().max(other.len());
        let a = self.pad_to(n);
        let b = other.pad_to(n);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(x, y)| x.sub(y))
            .collect();
        ChebSeries::new(coeffs, self.parity, self.rho.clone())
    }

    pub fn scale(&self, s: &Scalar) -> ChebSeries {
        let coeffs = self.coeffs.iter().map(|c| c.mul(s)).collect();
        ChebSeries::new(coeffs, self.parity, self.rho.clone())
    }

    /// |h_0| + 2 sum_{k>=1} |h_k| rho^k at the series' own weight.
    pub fn ell1_norm(&self) -> Scalar {
        self.ell1_norm_at(&self.rho.clone())
    }

    /// |h_0| + 2 sum_{k>=1} |h_k| w^k for an arbitrary weight w >= 1.
    pub fn ell1_norm_at(&self, w: &Scalar) -> Scalar {
        let p = self.prec().max(w.prec());
        let step = match self.parity {
            Parity::Even => w.square(),
            Parity::General => w.clone(),
        };
        let mut pw = Scalar::one(p);
        let mut sum = self.coeffs[0].abs();
        for c in self.coeffs.iter().skip(1) {
            pw = pw.mul(&step);
            sum = sum.add(&c.abs().mul(&pw).mul_2exp(1));
        }
        sum
    }

    /// Clenshaw evaluation of a general-storage coefficient vector at y.
    fn clenshaw_general(coeffs: &[Scalar], y: &Scalar) -> Scalar {
        let p = coeffs.iter().map(|c| c.prec()).max().unwrap().max(y.prec());
        let n = coeffs.len() - 1;
        let mut b1 = Scalar::zero(p);
        let mut b2 = Scalar::zero(p);
        let two_y = y.mul_2exp(1);
        for k in (1..=n).rev() {
            let bk = two_y.mul(&b1).sub(&b2).add(&coeffs[k].mul_2exp(1));
            b2 = b1;
            b1 = bk;
        }
        y.mul(&b1).sub(&b2).add(&coeffs[0])
    }

    fn clenshaw_general_c(coeffs: &[Scalar], y: &ComplexBox) -> ComplexBox {
        let p = coeffs
            .iter()
            .map(|c| c.prec())
            .max()
            .unwrap()
            .max(y.prec());
        let n = coeffs.len() - 1;
        let zero = ComplexBox::from_real(Scalar::zero(p));
        let mut b1 = zero.clone();
        let mut b2 = zero;
        let two = Scalar::from_i(2, p);
        let two_y = y.scale(&two);
        for k in (1..=n).rev() {
            let bk = two_y
                .mul(&b1)
                .sub(&b2)
                .add_real(&coeffs[k].mul_2exp(1));
            b2 = b1;
            b1 = bk;
        }
        y.mul(&b1).sub(&b2).add_real(&coeffs[0])
    }

    /// Rigorous enclosure of h(x) for a real interval x.
    pub fn eval_s(&self, x: &Scalar) -> Scalar {
        match self.parity {
            Parity::General => Self::clenshaw_general(&self.coeffs, x),
            Parity::Even => {
                // T_{2i}(x) = T_i(2x^2 - 1)
                let y = x.square().mul_2exp(1).sub(&Scalar::one(x.prec()));
                Self::clenshaw_general(&self.coeffs, &y)
            }
        }
    }

    /// Rigorous enclosure of h(z) for a complex box z.
    pub fn eval_c(&self, z: &ComplexBox) -> ComplexBox {
        match self.parity {
            Parity::General => Self::clenshaw_general_c(&self.coeffs, z),
            Parity::Even => {
                let p = z.prec();
                let one = Scalar::one(p);
                let y = z.mul(z).scale(&Scalar::from_i(2, p)).sub(&ComplexBox::from_real(one));
                Self::clenshaw_general_c(&self.coeffs, &y)
            }
        }
    }

    pub fn eval_f(&self, x: &Float) -> Scalar {
        self.eval_s(&Scalar::point(x.clone()))
    }

    /// Exact interval coefficients of h'. Parity flips even -> general
    /// (the result has odd modes only, stored with stride one).
    pub fn differentiate(&self) -> ChebSeries {
        let g = self.to_general();
        let p = g.prec();
        let n = g.degree();
        if n == 0 {
            return ChebSeries::zero(Parity::General, p, self.rho.clone());
        }
        // c_k = c_{k+2} + 2(k+1) h_{k+1}
        let mut out = vec![Scalar::zero(p); n];
        for k in (0..n).rev() {
            let term = g.coeffs[k + 1]
                .mul(&Scalar::from_u(2 * (k as u64 + 1), p));
            out[k] = if k + 2 < n {
                out[k + 2].add(&term)
            } else {
                term
            };
        }
        ChebSeries::new(out, Parity::General, self.rho.clone())
    }

    /// The linear functional h''(0) for even series, via the closed form
    /// h''(0) = sum_{i>=1} 8 i^2 (-1)^{i+1} h_{2i}.
    pub fn even_second_derivative_at_zero(&self) -> Scalar {
        assert_eq!(self.parity, Parity::Even);
        let p = self.prec();
        let mut sum = Scalar::zero(p);
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            let w = 8 * (i as i64) * (i as i64) * if i % 2 == 1 { 1 } else { -1 };
            sum = sum.add(&c.mul(&Scalar::from_i(w, p)));
        }
        sum
    }

    /// Midpoint (non-rigorous) coefficients.
    pub fn midpoints(&self) -> Vec<Float> {
        self.coeffs.iter().map(|c| c.mid()).collect()
    }

    pub fn to_point_series(&self) -> ChebSeries {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| Scalar::point(c.mid()))
            .collect();
        ChebSeries::new(coeffs, self.parity, self.rho.clone())
    }
}

/// Values of T_{2i}(x) for i = 0..count-1 via the three-term recurrence in
/// y = 2x^2 - 1.
pub fn even_basis_values(x: &Scalar, count: usize) -> Vec<Scalar> {
    let p = x.prec();
    let y = x.square().mul_2exp(1).sub(&Scalar::one(p));
    let mut out = Vec::with_capacity(count);
    out.push(Scalar::one(p));
    if count > 1 {
        out.push(y.clone());
    }
    let two_y = y.mul_2exp(1);
    for i in 2..count {
        let next = two_y.mul(&out[i - 1]).sub(&out[i - 2]);
        out.push(next);
    }
    out
}

/// Values at the half-grid Chebyshev nodes x_j = cos((k-j)pi/(2k)).
#[derive(Clone, Debug)]
pub struct GridValues {
    pub values: Vec<Scalar>,
    pub k: usize,
}

/// Transform between stored coefficients and node values.
///
/// For an even series of degree 2k the nodes are the half-grid
/// `x_j = cos((k-j)pi/(2k))`; for a general series of degree k they are the
/// full grid `cos((k-j)pi/k)`. Both cases share the same (k+1)x(k+1)
/// matrices, acting on the stored coefficient vector.
pub struct DctPlan {
    k: usize,
    prec: u32,
    nodes_half: Vec<Scalar>,
    nodes_full: Vec<Scalar>,
    fwd: Vec<Vec<Scalar>>,
    inv: Vec<Vec<Scalar>>,
}

/// Enclosure of cos(pi * num / den), exact at the dyadic special angles.
pub fn cos_pi_ratio(num: i64, den: i64, prec: u32) -> Scalar {
    assert!(den > 0);
    let r = num.rem_euclid(2 * den);
    // cos(pi r / den) for r in [0, 2 den)
    if 2 * r == den || 2 * r == 3 * den {
        return Scalar::zero(prec);
    }
    if r == 0 {
        return Scalar::one(prec);
    }
    if r == den {
        return Scalar::from_i(-1, prec);
    }
    if 3 * r == den || 3 * r == 5 * den {
        return Scalar::one(prec).mul_2exp(-1);
    }
    if 3 * r == 2 * den || 3 * r == 4 * den {
        return Scalar::from_i(-1, prec).mul_2exp(-1);
    }
    Scalar::pi(prec)
        .mul(&Scalar::from_ratio(r, den, prec))
        .cos()
}

impl DctPlan {
    pub fn new(k: usize, prec: u32) -> Self {
        assert!(k >= 1);
        // cos(pi r / k) for r = 0..2k-1
        let table: Vec<Scalar> = (0..2 * k)
            .map(|r| cos_pi_ratio(r as i64, k as i64, prec))
            .collect();
        let idx = |row: usize, col: usize| (col * (k - row)) % (2 * k);
        let mut fwd = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let mut row = Vec::with_capacity(k + 1);
            for i in 0..=k {
                let c = table[idx(j, i)].clone();
                row.push(if i == 0 { c } else { c.mul_2exp(1) });
            }
            fwd.push(row);
        }
        let inv_k = Scalar::from_ratio(1, k as i64, prec);
        let mut inv = Vec::with_capacity(k + 1);
        for l in 0..=k {
            let mut row = Vec::with_capacity(k + 1);
            for j in 0..=k {
                let mut e = table[idx(j, l)].mul(&inv_k);
                if j == 0 || j == k {
                    e = e.mul_2exp(-1);
                }
                if l == k {
                    e = e.mul_2exp(-1);
                }
                row.push(e);
            }
            inv.push(row);
        }
        let nodes_half: Vec<Scalar> = (0..=k)
            .map(|j| cos_pi_ratio((k - j) as i64, 2 * k as i64, prec))
            .collect();
        let nodes_full: Vec<Scalar> = (0..=k)
            .map(|j| cos_pi_ratio((k - j) as i64, k as i64, prec))
            .collect();
        DctPlan {
            k,
            prec,
            nodes_half,
            nodes_full,
            fwd,
            inv,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Half-grid nodes, for even series of degree 2k.
    pub fn nodes_even(&self) -> &[Scalar] {
        &self.nodes_half
    }

    /// Full-grid nodes, for general series of degree k.
    pub fn nodes_general(&self) -> &[Scalar] {
        &self.nodes_full
    }

    pub fn fwd_matrix(&self) -> &[Vec<Scalar>] {
        &self.fwd
    }

    pub fn inv_matrix(&self) -> &[Vec<Scalar>] {
        &self.inv
    }

    fn mat_vec(m: &[Vec<Scalar>], v: &[Scalar]) -> Vec<Scalar> {
        m.iter()
            .map(|row| {
                let mut acc = row[0].mul(&v[0]);
                for (a, b) in row.iter().zip(v.iter()).skip(1) {
                    acc = acc.add(&a.mul(b));
                }
                acc
            })
            .collect()
    }

    /// Node values of an even series of degree <= 2k.
    pub fn values_from_coeffs(&self, h: &ChebSeries) -> Result<GridValues> {
        if h.parity() != Parity::Even {
            return Err(Error::InvalidParam(
                "values_from_coeffs expects an even series".into(),
            ));
        }
        if h.len() > self.k + 1 {
            return Err(Error::InvalidParam(format!(
                "series degree {} exceeds transform degree {}",
                h.degree(),
                2 * self.k
            )));
        }
        let padded = h.pad_to(self.k + 1);
        Ok(GridValues {
            values: Self::mat_vec(&self.fwd, padded.coeffs()),
            k: self.k,
        })
    }

    /// Even interpolation polynomial through the given node values.
    pub fn coeffs_from_values(&self, v: &GridValues, rho: Scalar) -> ChebSeries {
        assert_eq!(v.values.len(), self.k + 1);
        ChebSeries::new(Self::mat_vec(&self.inv, &v.values), Parity::Even, rho)
    }

    /// Node values of a general series of degree <= k at the full grid.
    pub fn values_from_coeffs_general(&self, h: &ChebSeries) -> Result<Vec<Scalar>> {
        if h.parity() != Parity::General {
            return Err(Error::InvalidParam(
                "values_from_coeffs_general expects a general series".into(),
            ));
        }
        if h.len() > self.k + 1 {
            return Err(Error::InvalidParam(format!(
                "series degree {} exceeds transform degree {}",
                h.degree(),
                self.k
            )));
        }
        let padded = h.pad_to(self.k + 1);
        Ok(Self::mat_vec(&self.fwd, padded.coeffs()))
    }

    /// Same inverse transform applied to raw values.
    pub fn coeffs_from_raw(&self, values: &[Scalar], parity: Parity, rho: Scalar) -> ChebSeries {
        assert_eq!(values.len(), self.k + 1);
        ChebSeries::new(Self::mat_vec(&self.inv, values), parity, rho)
    }

    /// |M^{-1}| applied to a vector of nonnegative bounds.
    pub fn abs_inv_apply(&self, bounds: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(bounds.len(), self.k + 1);
        self.inv
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero(self.prec);
                for (a, b) in row.iter().zip(bounds.iter()) {
                    acc = acc.add(&a.abs().mul(b));
                }
                acc
            })
            .collect()
    }
}

/// Interpolation projection of h at the given order (`Pi^order`), preserving
/// the parity of the input. For even series the order must be even.
pub fn interpolate(h: &ChebSeries, order: usize) -> Result<ChebSeries> {
    let prec = h.prec();
    match h.parity() {
        Parity::Even => {
            if order % 2 != 0 || order == 0 {
                return Err(Error::InvalidParam(
                    "even interpolation needs a positive even order".into(),
                ));
            }
            let plan = DctPlan::new(order / 2, prec);
            interpolate_with_plan(h, &plan)
        }
        Parity::General => {
            let plan = DctPlan::new(order, prec);
            let values: Vec<Scalar> = plan
                .nodes_general()
                .iter()
                .map(|x| h.eval_s(x))
                .collect();
            Ok(plan.coeffs_from_raw(&values, Parity::General, h.rho().clone()))
        }
    }
}

/// Even interpolation re-using a prebuilt plan.
pub fn interpolate_with_plan(h: &ChebSeries, plan: &DctPlan) -> Result<ChebSeries> {
    if h.parity() != Parity::Even {
        return Err(Error::InvalidParam("plan interpolation expects even".into()));
    }
    if h.len() <= plan.k() + 1 {
        // degree already <= 2k: interpolation reproduces the polynomial
        return Ok(h.pad_to(plan.k() + 1));
    }
    let values: Vec<Scalar> = plan.nodes_even().iter().map(|x| h.eval_s(x)).collect();
    Ok(plan.coeffs_from_values(
        &GridValues {
            values,
            k: plan.k(),
        },
        h.rho().clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;
    use crate::testutil::SplitMix64;
    use rug::Float;

    const P: u32 = 128;

    fn rho2() -> Scalar {
        Scalar::from_i(2, P)
    }

    fn t(mode: usize, parity: Parity) -> ChebSeries {
        ChebSeries::basis(mode, parity, P, rho2())
    }

    #[test]
    fn ell1_norm_single_modes() {
        // T_0 at rho=2 -> 1
        let n = t(0, Parity::Even).ell1_norm();
        assert!(n.contains_f(&Float::with_val(P, 1)));
        assert!(n.width_upper().to_f64() < 1e-30);
        // T_2 (h_2 = 1/2) at rho=2 -> 2 * (1/2) * 4 = 4
        let n = t(2, Parity::Even).ell1_norm();
        assert!(n.contains_f(&Float::with_val(P, 4)));
    }

    #[test]
    fn ell1_norm_matches_rational_oracle() {
        // random 10-mode series with dyadic coefficients, rho = 3/2
        let mut rng = SplitMix64::new(42);
        for _ in 0..20 {
            let coeffs: Vec<i64> = (0..10).map(|_| rng.next_u64() as i64 % 1000).collect();
            let series = ChebSeries::new(
                coeffs
                    .iter()
                    .map(|&c| Scalar::from_ratio(c, 64, P))
                    .collect(),
                Parity::General,
                Scalar::from_ratio(3, 2, P),
            );
            // exact rational sum with rug::Rational
            let mut exact = rug::Rational::from((coeffs[0].abs(), 64));
            for (k, &c) in coeffs.iter().enumerate().skip(1) {
                let pw = rug::Rational::from((3, 2)).pow(k as u32);
                exact += rug::Rational::from((2 * c.abs(), 64)) * pw;
            }
            let val = Float::with_val(256, &exact);
            assert!(series.ell1_norm().contains_f(&val));
        }
    }

    #[test]
    fn clenshaw_matches_known_values() {
        // T_2(0.5) = -0.5
        let v = t(2, Parity::Even).eval_s(&Scalar::from_ratio(1, 2, P));
        assert!(v.contains_f(&Float::with_val(P, -0.5)));
        // T_0 anywhere = 1
        let v = t(0, Parity::Even).eval_s(&Scalar::from_f64(0.37, P));
        assert!(v.contains_f(&Float::with_val(P, 1)));
        // T_4 at the boundary point of E_2 at theta=0 (z = 1.25):
        // T_4((z+1/z)/2) with z=2 -> (16 + 1/16)/2 = 8.03125
        let v = t(4, Parity::Even).eval_s(&Scalar::from_ratio(5, 4, P));
        assert!(v.contains_f(&Float::with_val(P, 8.03125)));
        // same through the complex path
        let z = ComplexBox::from_real(Scalar::from_ratio(5, 4, P));
        let v = t(4, Parity::Even).eval_c(&z);
        assert!(v.re.contains_f(&Float::with_val(P, 8.03125)));
        assert!(v.im.contains_zero());
    }

    #[test]
    fn dct_matrix_matches_reference() {
        // K=2 forward matrix rows: [[1,-2,2],[1,0,-2],[1,2,2]]
        let plan = DctPlan::new(2, P);
        let expect = [[1.0, -2.0, 2.0], [1.0, 0.0, -2.0], [1.0, 2.0, 2.0]];
        for (j, row) in plan.fwd_matrix().iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                assert!(
                    e.contains_f(&Float::with_val(P, expect[j][i])),
                    "entry ({j},{i}) = {e} expected {}",
                    expect[j][i]
                );
            }
        }
        // M * M^{-1} contains the identity
        for i in 0..=2 {
            for j in 0..=2 {
                let mut acc = Scalar::zero(P);
                for l in 0..=2 {
                    acc = acc.add(&plan.fwd_matrix()[i][l].mul(&plan.inv_matrix()[l][j]));
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(acc.contains_f(&Float::with_val(P, expect)));
            }
        }
    }

    #[test]
    fn transforms_roundtrip_examples() {
        let plan = DctPlan::new(2, P);
        // T_0 -> values [1,1,1]
        let v = plan.values_from_coeffs(&t(0, Parity::Even)).unwrap();
        for x in &v.values {
            assert!(x.contains_f(&Float::with_val(P, 1)));
        }
        // T_4 -> values [1,-1,1] at nodes {0, sqrt(2)/2, 1}
        let v = plan.values_from_coeffs(&t(4, Parity::Even)).unwrap();
        let expect = [1.0, -1.0, 1.0];
        for (x, e) in v.values.iter().zip(expect) {
            assert!(x.contains_f(&Float::with_val(P, e)));
        }
        // back: coefficients enclose [0,0,1/2]
        let c = plan.coeffs_from_values(&v, rho2());
        assert!(c.coeffs()[0].contains_zero());
        assert!(c.coeffs()[1].contains_zero());
        assert!(c.coeffs()[2].contains_f(&Float::with_val(P, 0.5)));
        // values [1,1,1] -> coefficients [1,0,0]
        let c = plan.coeffs_from_values(
            &GridValues {
                values: vec![Scalar::one(P), Scalar::one(P), Scalar::one(P)],
                k: 2,
            },
            rho2(),
        );
        assert!(c.coeffs()[0].contains_f(&Float::with_val(P, 1)));
        assert!(c.coeffs()[1].contains_zero());
        assert!(c.coeffs()[2].contains_zero());
    }

    #[test]
    fn roundtrip_random_even_polynomial() {
        // degree 8 random even polynomial, K=4: round trip containment
        let mut rng = SplitMix64::new(7);
        for _ in 0..10 {
            let coeffs: Vec<Scalar> = (0..5)
                .map(|_| Scalar::from_ratio(rng.next_u64() as i64 % 257 - 128, 32, P))
                .collect();
            let h = ChebSeries::new(coeffs, Parity::Even, rho2());
            let plan = DctPlan::new(4, P);
            let v = plan.values_from_coeffs(&h).unwrap();
            let back = plan.coeffs_from_values(&v, rho2());
            for (a, b) in h.coeffs().iter().zip(back.coeffs()) {
                assert!(b.contains(a), "{b} does not contain {a}");
            }
        }
    }

    #[test]
    fn interpolation_aliases_top_mode_to_constant() {
        // Pi^{2K} of T_{2K}... here: interpolate T_{2k} at order 2k and check
        // the alias relations: with interpolation order N=2k, T_{2k} keeps
        // its own coefficient (2k <= N). Use order N=2k with series T_{2N}:
        // T_{2N}(x_j) = 1 at all half-grid nodes, so Pi^N T_{2N} = T_0.
        let k = 4usize;
        let order = 2 * k; // N = 8
        let h = t(2 * order, Parity::Even); // T_16
        let p = interpolate(&h, order).unwrap();
        assert!(p.coeffs()[0].contains_f(&Float::with_val(P, 1)));
        for c in p.coeffs().iter().skip(1) {
            assert!(c.contains_zero());
        }
    }

    #[test]
    fn interpolation_reproduces_low_degree() {
        let h = t(6, Parity::Even);
        let p = interpolate(&h, 12).unwrap();
        for (mode, c) in (0..=12).step_by(2).zip(p.coeffs()) {
            let expect = if mode == 6 { 0.5 } else { 0.0 };
            assert!(c.contains_f(&Float::with_val(P, expect)));
        }
    }

    #[test]
    fn aliasing_identity_random_series() {
        // check h_k -> h_k + sum_l (h_{2Nl-k} + h_{2Nl+k}) under Pi^N
        let mut rng = SplitMix64::new(99);
        let order = 8usize; // N
        for _ in 0..100 {
            let deg = 6 * order;
            let coeffs: Vec<Scalar> = (0..=deg / 2)
                .map(|_| Scalar::from_ratio(rng.next_u64() as i64 % 201 - 100, 128, P))
                .collect();
            let h = ChebSeries::new(coeffs, Parity::Even, rho2());
            let p = interpolate(&h, order).unwrap();
            for k in (0..=order).step_by(2) {
                // expected alias sum
                let mut expect = h.coeff(k);
                let mut l = 1usize;
                loop {
                    let up = 2 * order * l + k;
                    let down = 2 * order * l - k;
                    if down > h.degree() && up > h.degree() {
                        break;
                    }
                    if k == 0 {
                        expect = expect.add(&h.coeff(up).mul_2exp(1));
                    } else if k == order {
                        expect = expect.add(&h.coeff(up));
                        // down = 2Nl - N aliases as the (2l-1)N mode which is
                        // odd multiple of N; for k=N the lemma has only +k terms
                    } else {
                        expect = expect.add(&h.coeff(up)).add(&h.coeff(down));
                    }
                    l += 1;
                }
                let got = p.coeff(k);
                assert!(
                    got.try_intersect(&expect).is_some(),
                    "alias mismatch at mode {k}: got {got} expected {expect}"
                );
            }
        }
    }

    #[test]
    fn projection_contracts_ell1() {
        let mut rng = SplitMix64::new(123);
        for _ in 0..50 {
            let coeffs: Vec<Scalar> = (0..12)
                .map(|_| Scalar::from_ratio(rng.next_u64() as i64 % 201 - 100, 64, P))
                .collect();
            let h = ChebSeries::new(coeffs, Parity::Even, rho2());
            let p = interpolate(&h, 8).unwrap();
            assert!(p.ell1_norm().hi() <= h.ell1_norm().hi());
        }
    }

    #[test]
    fn differentiate_basis() {
        // T_0' = 0
        let d = t(0, Parity::Even).differentiate();
        assert!(d.coeffs().iter().all(|c| c.contains_zero()));
        // T_2' = 4 T_1
        let d = t(2, Parity::Even).differentiate();
        assert!(d.coeff(1).contains_f(&Float::with_val(P, 2))); // h = 2*2*T_1
        assert!(d.coeff(0).contains_zero());
        // T_4' = 8 T_3 + 8 T_1
        let d = t(4, Parity::Even).differentiate();
        assert!(d.coeff(3).contains_f(&Float::with_val(P, 4)));
        assert!(d.coeff(1).contains_f(&Float::with_val(P, 4)));
    }

    #[test]
    fn differentiate_vs_finite_differences() {
        let mut rng = SplitMix64::new(5);
        let coeffs: Vec<Scalar> = (0..6)
            .map(|_| Scalar::from_ratio(rng.next_u64() as i64 % 101 - 50, 64, P))
            .collect();
        let h = ChebSeries::new(coeffs, Parity::Even, rho2());
        let d = h.differentiate();
        for i in 0..10 {
            let x = -0.9 + 0.2 * i as f64;
            let eps = 1e-6;
            let fd = (h.eval_s(&Scalar::from_f64(x + eps, P)).to_f64_mid()
                - h.eval_s(&Scalar::from_f64(x - eps, P)).to_f64_mid())
                / (2.0 * eps);
            let dv = d.eval_s(&Scalar::from_f64(x, P)).to_f64_mid();
            assert!((fd - dv).abs() < 1e-5 * (1.0 + dv.abs()), "x={x}: {fd} vs {dv}");
        }
    }

    #[test]
    fn second_derivative_functional() {
        // T_2''(0) = 4
        let v = t(2, Parity::Even).even_second_derivative_at_zero();
        assert!(v.contains_f(&Float::with_val(P, 4)));
        // T_4''(0) = -16: T_4 = 8x^4 - 8x^2 + 1 -> f'' = 96x^2 - 16
        let v = t(4, Parity::Even).even_second_derivative_at_zero();
        assert!(v.contains_f(&Float::with_val(P, -16)));
        // cross-check with two exact differentiations
        let dd = t(6, Parity::Even).differentiate().differentiate();
        let at0 = dd.eval_s(&Scalar::zero(P));
        let func = t(6, Parity::Even).even_second_derivative_at_zero();
        assert!(at0.try_intersect(&func).is_some());
    }
}

