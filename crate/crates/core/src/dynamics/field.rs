use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::CubicalTensor;

/// Scalar map applied to the head variables of a non-polynomial interaction.
#[derive(Clone)]
pub enum InteractionFunction {
    Identity,
    Arctan,
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl InteractionFunction {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        InteractionFunction::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InteractionFunction::Identity => x,
            InteractionFunction::Arctan => x.atan(),
            InteractionFunction::Custom { f, .. } => f(x),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            InteractionFunction::Identity => "identity",
            InteractionFunction::Arctan => "arctan",
            InteractionFunction::Custom { name, .. } => name,
        }
    }

    /// Samples 10^4 points on [-10, 10]. Advisory only.
    pub fn check_assumptions(&self) -> AssumptionReport {
        const SAMPLES: usize = 10_000;
        let xs: Vec<f64> = (0..SAMPLES)
            .map(|i| -10.0 + 20.0 * i as f64 / (SAMPLES - 1) as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| self.eval(x)).collect();
        let continuous_increasing = ys.iter().all(|y| y.is_finite()) && ys.windows(2).all(|w| w[1] > w[0]);
        let positive_on_positive = xs.iter().zip(&ys).filter(|(x, _)| **x > 0.0).all(|(_, &y)| y > 0.0);
        let odd = xs
            .iter()
            .zip(&ys)
            .all(|(&x, &y)| (self.eval(-x) + y).abs() <= 1e-12 * (1.0 + y.abs()));
        AssumptionReport {
            strictly_increasing: continuous_increasing,
            positive_on_positive,
            odd,
        }
    }
}

impl fmt::Debug for InteractionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InteractionFunction({})", self.name())
    }
}

impl PartialEq for InteractionFunction {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl FromStr for InteractionFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(InteractionFunction::Identity),
            "arctan" => Ok(InteractionFunction::Arctan),
            other => Err(Error::InvalidArgument(format!(
                "unknown interaction function {other:?} (expected identity or arctan)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssumptionReport {
    pub strictly_increasing: bool,
    pub positive_on_positive: bool,
    pub odd: bool,
}

impl AssumptionReport {
    /// Monotone, continuous, positive on the positive axis.
    pub fn signless_ok(&self) -> bool {
        self.strictly_increasing && self.positive_on_positive
    }

    /// Additionally odd, as signed runs require.
    pub fn signed_ok(&self) -> bool {
        self.signless_ok() && self.odd
    }
}

#[derive(Debug, Clone)]
pub enum FieldKind {
    /// `x' = A x^{k-1}`.
    Metzler(CubicalTensor),
    /// `x' = -L x^{k-1}`.
    UniformLaplacian(CubicalTensor),
    /// `x' = -sum_m L_m x^{m-1}`.
    NonUniform(Vec<CubicalTensor>),
    /// `x'_i = -sum_m sum L_m[i, i2, .., im] f(x_i2) .. f(x_im)`.
    NonPolynomial {
        layers: Vec<CubicalTensor>,
        f: InteractionFunction,
    },
}

/// Right-hand side of one of the supported polynomial or non-polynomial systems.
#[derive(Debug, Clone)]
pub struct VectorField {
    kind: FieldKind,
    dim: usize,
}

fn common_dim(tensors: &[CubicalTensor]) -> Result<usize> {
    let first = tensors
        .first()
        .ok_or_else(|| Error::InvalidArgument("vector field needs at least one tensor".into()))?;
    if let Some(t) = tensors.iter().find(|t| t.dim() != first.dim()) {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            got: t.dim(),
        });
    }
    Ok(first.dim())
}

impl VectorField {
    pub fn metzler(a: CubicalTensor) -> Self {
        Self {
            dim: a.dim(),
            kind: FieldKind::Metzler(a),
        }
    }

    pub fn uniform_laplacian(l: CubicalTensor) -> Self {
        Self {
            dim: l.dim(),
            kind: FieldKind::UniformLaplacian(l),
        }
    }

    pub fn non_uniform(layers: Vec<CubicalTensor>) -> Result<Self> {
        let dim = common_dim(&layers)?;
        Ok(Self {
            dim,
            kind: FieldKind::NonUniform(layers),
        })
    }

    pub fn non_polynomial(layers: Vec<CubicalTensor>, f: InteractionFunction) -> Result<Self> {
        let dim = common_dim(&layers)?;
        Ok(Self {
            dim,
            kind: FieldKind::NonPolynomial { layers, f },
        })
    }

    /// Uniform Laplacian for one layer, non-uniform otherwise.
    pub fn laplacian_layers(mut layers: Vec<CubicalTensor>) -> Result<Self> {
        if layers.len() == 1 {
            Ok(Self::uniform_laplacian(layers.pop().expect("one layer")))
        } else {
            Self::non_uniform(layers)
        }
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tensors(&self) -> Vec<&CubicalTensor> {
        match &self.kind {
            FieldKind::Metzler(t) | FieldKind::UniformLaplacian(t) => vec![t],
            FieldKind::NonUniform(ls) | FieldKind::NonPolynomial { layers: ls, .. } => ls.iter().collect(),
        }
    }

    /// Highest tensor order in the field.
    pub fn leading_order(&self) -> usize {
        self.tensors().iter().map(|t| t.order()).max().unwrap_or(2)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        let mut scratch = vec![0.0; self.dim];
        self.eval_into(x, &mut out, &mut scratch);
        Ok(out)
    }

    /// Writes the right-hand side into `out`. `scratch` must have length `dim`.
    pub(crate) fn eval_into(&self, x: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        match &self.kind {
            FieldKind::Metzler(a) => a.apply_into(x, out),
            FieldKind::UniformLaplacian(l) => {
                l.apply_into(x, out);
                out.iter_mut().for_each(|v| *v = -*v);
            }
            FieldKind::NonUniform(layers) => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut term = vec![0.0; self.dim];
                for l in layers {
                    l.apply_into(x, &mut term);
                    out.iter_mut().zip(&term).for_each(|(o, t)| *o -= t);
                }
            }
            FieldKind::NonPolynomial { layers, f } => {
                for (s, &xi) in scratch.iter_mut().zip(x) {
                    *s = f.eval(xi);
                }
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut term = vec![0.0; self.dim];
                for l in layers {
                    l.apply_into(scratch, &mut term);
                    out.iter_mut().zip(&term).for_each(|(o, t)| *o -= t);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_ones_laplacian() -> CubicalTensor {
        CubicalTensor::filled(4, 4, 1.0)
            .unwrap()
            .scale(-1.0)
            .shift_diagonal(64.0)
    }

    #[test]
    fn consensus_manifold_is_stationary() {
        let f = VectorField::uniform_laplacian(all_ones_laplacian());
        for c in [0.0, 0.3, 1.0, 2.5] {
            assert!(f.eval(&[c; 4]).unwrap().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn identity_interaction_matches_polynomial() {
        let l = all_ones_laplacian();
        let poly = VectorField::uniform_laplacian(l.clone());
        let np = VectorField::non_polynomial(vec![l], InteractionFunction::Identity).unwrap();
        let x = [0.7, 1.3, 0.2, 0.9];
        assert_eq!(poly.eval(&x).unwrap(), np.eval(&x).unwrap());
    }

    #[test]
    fn non_polynomial_leaves_tail_untouched() {
        // x' = -L f(x): with L = identity the tail never appears, only f(x_i)^{k-1}
        let l = CubicalTensor::identity(3, 2).unwrap();
        let np = VectorField::non_polynomial(vec![l], InteractionFunction::Arctan).unwrap();
        let out = np.eval(&[1.0, -2.0]).unwrap();
        assert!((out[0] + 1f64.atan().powi(2)).abs() < 1e-15);
        assert!((out[1] + (-2f64).atan().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn mismatched_layers_rejected() {
        let a = CubicalTensor::identity(2, 3).unwrap();
        let b = CubicalTensor::identity(3, 4).unwrap();
        assert!(VectorField::non_uniform(vec![a, b]).is_err());
        assert!(VectorField::non_uniform(vec![]).is_err());
    }

    #[test]
    fn builtin_functions_satisfy_assumptions() {
        for f in [InteractionFunction::Identity, InteractionFunction::Arctan] {
            assert!(f.check_assumptions().signed_ok(), "{f:?}");
        }
        let square = InteractionFunction::custom("square", |x| x * x);
        let r = square.check_assumptions();
        assert!(!r.strictly_increasing && !r.odd);
        let shifted = InteractionFunction::custom("exp", f64::exp);
        let r = shifted.check_assumptions();
        assert!(r.signless_ok() && !r.odd);
    }

    #[test]
    fn parse_function_names() {
        assert_eq!("arctan".parse::<InteractionFunction>().unwrap().name(), "arctan");
        assert!("tanh".parse::<InteractionFunction>().is_err());
    }
}
