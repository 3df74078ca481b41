//! Dense matrix helpers: midpoint LU factorization for approximate
//! inverses, interval matrix products, and the weighted operator norm on
//! the product space R x l^1_rho (alpha slot plus even Chebyshev modes).

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use rug::Float;

/// Row-major midpoint (non-rigorous) matrix.
#[derive(Clone, Debug)]
pub struct FMat {
    pub n: usize,
    pub data: Vec<Float>,
}

impl FMat {
    pub fn zeros(n: usize, prec: u32) -> Self {
        FMat {
            n,
            data: vec![Float::with_val(prec, 0); n * n],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, prec);
        for i in 0..n {
            m.data[i * n + i] = Float::with_val(prec, 1);
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &Float {
        &self.data[r * self.n + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Float {
        &mut self.data[r * self.n + c]
    }

    pub fn from_iv(m: &IvMat) -> Self {
        FMat {
            n: m.n,
            data: m.data.iter().map(|s| s.mid()).collect(),
        }
    }

    pub fn mat_vec(&self, v: &[Float]) -> Vec<Float> {
        let prec = self.data[0].prec();
        (0..self.n)
            .map(|r| {
                let mut acc = Float::with_val(prec, 0);
                for c in 0..self.n {
                    acc += self.at(r, c).clone() * &v[c];
                }
                acc
            })
            .collect()
    }

    /// Solve A x = b by LU with partial pivoting (midpoint arithmetic).
    pub fn solve(&self, b: &[Float]) -> Result<Vec<Float>> {
        let mut lu = self.clone();
        let n = self.n;
        let prec = self.data[0].prec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            // pivot
            let mut p = col;
            let mut best = lu.at(col, col).clone().abs();
            for r in col + 1..n {
                let v = lu.at(r, col).clone().abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best.is_zero() {
                return Err(Error::SingularSystem);
            }
            if p != col {
                for c in 0..n {
                    lu.data.swap(p * n + c, col * n + c);
                }
                perm.swap(p, col);
            }
            for r in col + 1..n {
                let factor = Float::with_val(prec, lu.at(r, col) / lu.at(col, col));
                *lu.at_mut(r, col) = factor.clone();
                for c in col + 1..n {
                    let delta = Float::with_val(prec, &factor * lu.at(col, c));
                    *lu.at_mut(r, c) -= delta;
                }
            }
        }
        // forward/backward substitution
        let mut x: Vec<Float> = perm.iter().map(|&i| b[i].clone()).collect();
        for r in 1..n {
            for c in 0..r {
                let delta = Float::with_val(prec, lu.at(r, c) * &x[c]);
                x[r] -= delta;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let delta = Float::with_val(prec, lu.at(r, c) * &x[c]);
                x[r] -= delta;
            }
            x[r] /= lu.at(r, r);
        }
        Ok(x)
    }

    /// Approximate inverse via LU solves on unit vectors.
    pub fn inverse(&self) -> Result<FMat> {
        let n = self.n;
        let prec = self.data[0].prec();
        let mut out = FMat::zeros(n, prec);
        // factor once by reusing solve on each unit vector; for the sizes in
        // this crate the repeated factorization is not the bottleneck, but
        // avoid it anyway by inlining a single LU pass
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut p = col;
            let mut best = lu.at(col, col).clone().abs();
            for r in col + 1..n {
                let v = lu.at(r, col).clone().abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best.is_zero() {
                return Err(Error::SingularSystem);
            }
            if p != col {
                for c in 0..n {
                    lu.data.swap(p * n + c, col * n + c);
                }
                perm.swap(p, col);
            }
            for r in col + 1..n {
                let factor = Float::with_val(prec, lu.at(r, col) / lu.at(col, col));
                *lu.at_mut(r, col) = factor.clone();
                for c in col + 1..n {
                    let delta = Float::with_val(prec, &factor * lu.at(col, c));
                    *lu.at_mut(r, c) -= delta;
                }
            }
        }
        for unit in 0..n {
            let mut x: Vec<Float> = perm
                .iter()
                .map(|&i| Float::with_val(prec, i32::from(i == unit)))
                .collect();
            for r in 1..n {
                for c in 0..r {
                    let delta = Float::with_val(prec, lu.at(r, c) * &x[c]);
                    x[r] -= delta;
                }
            }
            for r in (0..n).rev() {
                for c in r + 1..n {
                    let delta = Float::with_val(prec, lu.at(r, c) * &x[c]);
                    x[r] -= delta;
                }
                x[r] /= lu.at(r, r);
            }
            for r in 0..n {
                *out.at_mut(r, unit) = x[r].clone();
            }
        }
        Ok(out)
    }
}

/// Row-major interval matrix.
#[derive(Clone, Debug)]
pub struct IvMat {
    pub n: usize,
    pub data: Vec<Scalar>,
}

impl IvMat {
    pub fn zeros(n: usize, prec: u32) -> Self {
        IvMat {
            n,
            data: vec![Scalar::zero(prec); n * n],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, prec);
        for i in 0..n {
            m.data[i * n + i] = Scalar::one(prec);
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.n + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.data[r * self.n + c]
    }

    pub fn from_point(m: &FMat) -> Self {
        IvMat {
            n: m.n,
            data: m.data.iter().map(|f| Scalar::point(f.clone())).collect(),
        }
    }

    pub fn from_columns(cols: Vec<Vec<Scalar>>) -> Self {
        let n = cols.len();
        assert!(cols.iter().all(|c| c.len() == n));
        let prec = cols[0][0].prec();
        let mut m = IvMat::zeros(n, prec);
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                *m.at_mut(r, c) = v.clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &IvMat) -> IvMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let prec = self.data[0].prec().max(other.data[0].prec());
        let mut out = IvMat::zeros(n, prec);
        for r in 0..n {
            for c in 0..n {
                let mut acc = self.at(r, 0).mul(other.at(0, c));
                for l in 1..n {
                    acc = acc.add(&self.at(r, l).mul(other.at(l, c)));
                }
                *out.at_mut(r, c) = acc;
            }
        }
        out
    }

    pub fn sub(&self, other: &IvMat) -> IvMat {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a = a.sub(b);
        }
        out
    }

    pub fn mat_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        let n = self.n;
        (0..n)
            .map(|r| {
                let mut acc = self.at(r, 0).mul(&v[0]);
                for c in 1..n {
                    acc = acc.add(&self.at(r, c).mul(&v[c]));
                }
                acc
            })
            .collect()
    }

    /// |A| applied to a vector of nonnegative bounds.
    pub fn abs_mat_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        let n = self.n;
        (0..n)
            .map(|r| {
                let mut acc = self.at(r, 0).abs().mul(&v[0].abs());
                for c in 1..n {
                    acc = acc.add(&self.at(r, c).abs().mul(&v[c].abs()));
                }
                acc
            })
            .collect()
    }
}

/// Weights of the norm |alpha| + |h_0| + 2 sum rho^{2i} |h_{2i}| on vectors
/// laid out as (alpha, h_0, h_2, ..., h_{2(n-2)}).
pub fn space_weights(rho: &Scalar, n: usize) -> Vec<Scalar> {
    let prec = rho.prec();
    let mut w = Vec::with_capacity(n);
    w.push(Scalar::one(prec));
    if n > 1 {
        w.push(Scalar::one(prec));
    }
    let rho2 = rho.square();
    let mut pw = Scalar::one(prec);
    for _ in 2..n {
        pw = pw.mul(&rho2);
        w.push(pw.mul_2exp(1));
    }
    w
}

/// Weighted vector norm (enclosure).
pub fn weighted_vec_norm(v: &[Scalar], weights: &[Scalar]) -> Scalar {
    assert_eq!(v.len(), weights.len());
    let mut acc = v[0].abs().mul(&weights[0]);
    for (x, w) in v.iter().zip(weights).skip(1) {
        acc = acc.add(&x.abs().mul(w));
    }
    acc
}

/// Induced operator norm on the weighted space: max over columns c of
/// sum_r w_r |A_rc| / w_c. Upper bound.
pub fn weighted_op_norm(a: &IvMat, weights: &[Scalar]) -> Result<Scalar> {
    assert_eq!(a.n, weights.len());
    let prec = a.data[0].prec();
    let mut best = Scalar::zero(prec);
    for c in 0..a.n {
        let mut col_sum = Scalar::zero(prec);
        for r in 0..a.n {
            col_sum = col_sum.add(&a.at(r, c).abs().mul(&weights[r]));
        }
        let scaled = col_sum.checked_div(&weights[c])?;
        best = best.max_iv(&scaled);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::SplitMix64;

    #[test]
    fn lu_inverse_random() {
        let mut rng = SplitMix64::new(17);
        let n = 8;
        let prec = 128;
        let mut m = FMat::zeros(n, prec);
        for r in 0..n {
            for c in 0..n {
                *m.at_mut(r, c) = Float::with_val(prec, rng.f64_in(-1.0, 1.0));
            }
            // diagonally dominate to stay well-conditioned
            *m.at_mut(r, r) = Float::with_val(prec, 4.0 + rng.f64());
        }
        let inv = m.inverse().unwrap();
        for r in 0..n {
            for c in 0..n {
                let mut acc = Float::with_val(prec, 0);
                for l in 0..n {
                    acc += m.at(r, l).clone() * inv.at(l, c);
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((acc.to_f64() - expect).abs() < 1e-30);
            }
        }
    }

    #[test]
    fn op_norm_matches_brute_force() {
        // check the induced-norm formula against a random-vector supremum
        let mut rng = SplitMix64::new(23);
        let n = 5;
        let prec = 64;
        let rho = Scalar::from_ratio(3, 2, prec);
        let w = space_weights(&rho, n);
        let mut a = IvMat::zeros(n, prec);
        for r in 0..n {
            for c in 0..n {
                *a.at_mut(r, c) = Scalar::from_f64(rng.f64_in(-1.0, 1.0), prec);
            }
        }
        let norm = weighted_op_norm(&a, &w).unwrap();
        let mut sup = 0f64;
        // random unit vectors never exceed the norm; coordinate units
        // attain it
        for trial in 0..20_000 + n {
            let v: Vec<Scalar> = if trial < n {
                (0..n)
                    .map(|i| {
                        if i == trial {
                            Scalar::one(prec)
                        } else {
                            Scalar::zero(prec)
                        }
                    })
                    .collect()
            } else {
                (0..n)
                    .map(|_| Scalar::from_f64(rng.f64_in(-1.0, 1.0), prec))
                    .collect()
            };
            let vn = weighted_vec_norm(&v, &w).mid().to_f64();
            if vn < 1e-9 {
                continue;
            }
            let av = a.mat_vec(&v);
            let avn = weighted_vec_norm(&av, &w).mid().to_f64();
            sup = sup.max(avn / vn);
        }
        assert!(norm.hi().to_f64() >= sup * (1.0 - 1e-9));
        assert!(norm.hi().to_f64() <= sup * (1.0 + 1e-9), "{norm} vs {sup}");
    }
}
