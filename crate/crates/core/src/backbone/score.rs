use super::table::{dot, norm};
use crate::{Error, Result};

/// Interaction function `s(x_u, x_i)`. Temperature belongs to the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreKind {
    #[default]
    Cosine,
    Inner,
    SigmoidInner,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Cosine => "cosine",
            ScoreKind::Inner => "inner",
            ScoreKind::SigmoidInner => "sigmoid_inner",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(ScoreKind::Cosine),
            "inner" => Ok(ScoreKind::Inner),
            "sigmoid_inner" => Ok(ScoreKind::SigmoidInner),
            other => Err(Error::InvalidArgument(format!("unknown score kind {other:?}"))),
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            ScoreKind::Cosine => 0,
            ScoreKind::Inner => 1,
            ScoreKind::SigmoidInner => 2,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(ScoreKind::Cosine),
            1 => Some(ScoreKind::Inner),
            2 => Some(ScoreKind::SigmoidInner),
            _ => None,
        }
    }

    pub fn score(self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != v.len() {
            return Err(Error::ShapeMismatch(format!("vectors of dim {} and {}", u.len(), v.len())));
        }
        let d = dot(u, v);
        Ok(match self {
            ScoreKind::Inner => d,
            ScoreKind::SigmoidInner => sigmoid(d),
            ScoreKind::Cosine => {
                let n = norm(u) * norm(v);
                if n == 0.0 {
                    return Err(Error::ZeroNorm);
                }
                (d / n).clamp(-1.0, 1.0)
            }
        })
    }

    /// Score of `u`, `v` given their norms (only read under cosine).
    /// Zero-norm vectors under cosine score 0.
    #[inline]
    pub fn score_cached(self, u: &[f64], v: &[f64], nu: f64, nv: f64) -> f64 {
        let d = dot(u, v);
        match self {
            ScoreKind::Inner => d,
            ScoreKind::SigmoidInner => sigmoid(d),
            ScoreKind::Cosine => {
                if nu == 0.0 || nv == 0.0 {
                    0.0
                } else {
                    d / (nu * nv)
                }
            }
        }
    }

    /// Accumulates `gu += w * ds/du` and `gv += w * ds/dv` where `s` is the
    /// value returned by [`ScoreKind::score_cached`] for the same inputs.
    #[inline]
    #[allow(clippy::too_many_arguments)]
    pub fn accumulate_grad(
        self,
        u: &[f64],
        v: &[f64],
        nu: f64,
        nv: f64,
        s: f64,
        w: f64,
        gu: &mut [f64],
        gv: &mut [f64],
    ) {
        match self {
            ScoreKind::Inner => {
                axpy(gu, w, v);
                axpy(gv, w, u);
            }
            ScoreKind::SigmoidInner => {
                let ds = w * s * (1.0 - s);
                axpy(gu, ds, v);
                axpy(gv, ds, u);
            }
            ScoreKind::Cosine => {
                if nu == 0.0 || nv == 0.0 {
                    return;
                }
                // d cos / du = v / (|u||v|) - cos * u / |u|^2
                let a = w / (nu * nv);
                let bu = w * s / (nu * nu);
                let bv = w * s / (nv * nv);
                for k in 0..u.len() {
                    gu[k] += a * v[k] - bu * u[k];
                    gv[k] += a * u[k] - bv * v[k];
                }
            }
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_identities() {
        let e = [0.6, 0.8];
        assert_eq!(ScoreKind::Cosine.score(&e, &e).unwrap(), 1.0);
        assert_eq!(ScoreKind::Cosine.score(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        assert!(matches!(ScoreKind::Cosine.score(&[0.0, 0.0], &e), Err(Error::ZeroNorm)));
    }

    #[test]
    fn sigmoid_of_zero_pair() {
        assert_eq!(ScoreKind::SigmoidInner.score(&[0.0; 3], &[0.0; 3]).unwrap(), 0.5);
        assert!(ScoreKind::Inner.score(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn analytic_score_gradients_match_finite_differences() {
        let u = [0.3, -0.7, 0.2, 0.9];
        let v = [-0.4, 0.1, 0.5, 0.25];
        let h = 1e-6;
        for kind in [ScoreKind::Cosine, ScoreKind::Inner, ScoreKind::SigmoidInner] {
            let mut gu = [0.0; 4];
            let mut gv = [0.0; 4];
            let (nu, nv) = (norm(&u), norm(&v));
            let s = kind.score_cached(&u, &v, nu, nv);
            assert!((s - kind.score(&u, &v).unwrap()).abs() < 1e-15);
            kind.accumulate_grad(&u, &v, nu, nv, s, 1.0, &mut gu, &mut gv);
            for k in 0..4 {
                let mut up = u;
                let mut um = u;
                up[k] += h;
                um[k] -= h;
                let fd = (kind.score(&up, &v).unwrap() - kind.score(&um, &v).unwrap()) / (2.0 * h);
                assert!((fd - gu[k]).abs() < 1e-7, "{kind:?} du[{k}]");
                let mut vp = v;
                let mut vm = v;
                vp[k] += h;
                vm[k] -= h;
                let fd = (kind.score(&u, &vp).unwrap() - kind.score(&u, &vm).unwrap()) / (2.0 * h);
                assert!((fd - gv[k]).abs() < 1e-7, "{kind:?} dv[{k}]");
            }
        }
    }
}
