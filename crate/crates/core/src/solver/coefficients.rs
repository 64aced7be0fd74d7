use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Built-in noise and drift coefficients `sigma(u)`, `b(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    deny_unknown_fields,
    from = "RawCoefficientSpec"
)]
pub enum CoefficientSpec {
    /// `sigma = 0`, `b = 0`.
    Zero,
    /// Additive noise `sigma = 1`, `b = 0`.
    Linear,
    /// `sigma = const`, `b = 0`.
    ConstantSigma { sigma: f64 },
    /// `sigma = alpha + beta sin u`, `b = gamma tanh u`.
    SineTanh { alpha: f64, beta: f64, gamma: f64 },
    /// `sigma = sqrt(1 + u^2)`, `b = 0`.
    SqrtGrowth,
    /// `sigma = 0`, `b = gamma tanh u`.
    DeterministicTanh { gamma: f64 },
}

impl CoefficientSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = match *self {
            Self::ConstantSigma { sigma } => sigma.is_finite(),
            Self::SineTanh { alpha, beta, gamma } => {
                alpha.is_finite() && beta.is_finite() && gamma.is_finite()
            }
            Self::DeterministicTanh { gamma } => gamma.is_finite(),
            _ => true,
        };
        if !finite {
            return Err(config(format!(
                "non-finite coefficient parameters in {self:?}"
            )));
        }
        Ok(())
    }

    /// A constant `C` with `|sigma(u) - sigma(v)| + |b(u) - b(v)| <= C |u - v|`
    /// and `|sigma(u)| + |b(u)| <= C (1 + |u|)`.
    pub fn lipschitz_const(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Linear => 1.0,
            Self::ConstantSigma { sigma } => sigma.abs(),
            Self::SineTanh { alpha, beta, gamma } => alpha.abs() + beta.abs() + gamma.abs(),
            Self::SqrtGrowth => 1.0,
            Self::DeterministicTanh { gamma } => gamma.abs(),
        }
    }

    #[inline]
    fn sigma(&self, u: f64) -> f64 {
        match *self {
            Self::Zero | Self::DeterministicTanh { .. } => 0.0,
            Self::Linear => 1.0,
            Self::ConstantSigma { sigma } => sigma,
            Self::SineTanh { alpha, beta, .. } => alpha + beta * u.sin(),
            Self::SqrtGrowth => u.hypot(1.0),
        }
    }

    #[inline]
    fn drift(&self, u: f64) -> f64 {
        match *self {
            Self::SineTanh { gamma, .. } | Self::DeterministicTanh { gamma } => gamma * u.tanh(),
            _ => 0.0,
        }
    }
}

type CoefficientFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// Coefficients `sigma(t, x, u)` and `b(t, x, u)` driving the equation.
#[derive(Clone)]
pub enum Coefficients {
    Registry(CoefficientSpec),
    Custom {
        sigma: Arc<CoefficientFn>,
        drift: Arc<CoefficientFn>,
        lipschitz: f64,
    },
}

impl fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Registry(spec) => f.debug_tuple("Registry").field(spec).finish(),
            Self::Custom { lipschitz, .. } => f
                .debug_struct("Custom")
                .field("lipschitz", lipschitz)
                .finish_non_exhaustive(),
        }
    }
}

impl From<CoefficientSpec> for Coefficients {
    fn from(spec: CoefficientSpec) -> Self {
        Self::Registry(spec)
    }
}

impl Coefficients {
    /// User-supplied coefficients; `lipschitz` is recorded, not checked.
    pub fn custom<S, B>(sigma: S, drift: B, lipschitz: f64) -> Self
    where
        S: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::Custom {
            sigma: Arc::new(sigma),
            drift: Arc::new(drift),
            lipschitz,
        }
    }

    pub fn registry(&self) -> Option<CoefficientSpec> {
        match self {
            Self::Registry(spec) => Some(*spec),
            Self::Custom { .. } => None,
        }
    }

    pub fn lipschitz_const(&self) -> f64 {
        match self {
            Self::Registry(spec) => spec.lipschitz_const(),
            Self::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    #[inline]
    pub fn sigma(&self, t: f64, x: f64, u: f64) -> f64 {
        match self {
            Self::Registry(spec) => spec.sigma(u),
            Self::Custom { sigma, .. } => sigma(t, x, u),
        }
    }

    #[inline]
    pub fn drift(&self, t: f64, x: f64, u: f64) -> f64 {
        match self {
            Self::Registry(spec) => spec.drift(u),
            Self::Custom { drift, .. } => drift(t, x, u),
        }
    }

    /// True for the registry entries with `sigma = 0`.
    pub fn is_noiseless(&self) -> bool {
        matches!(
            self.registry(),
            Some(CoefficientSpec::Zero | CoefficientSpec::DeterministicTanh { .. })
        )
    }

    /// True for `sigma = 1`, `b = 0`.
    pub fn is_linear(&self) -> bool {
        matches!(
            self.registry(),
            Some(CoefficientSpec::Linear) | Some(CoefficientSpec::ConstantSigma { sigma: 1.0 })
        )
    }

    /// True for `sigma = 0`, `b = 0`.
    pub fn is_zero(&self) -> bool {
        matches!(
            self.registry(),
            Some(CoefficientSpec::Zero)
                | Some(CoefficientSpec::DeterministicTanh { gamma: 0.0 })
                | Some(CoefficientSpec::ConstantSigma { sigma: 0.0 })
        )
    }
}

/// Bounded initial data `u_0(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    deny_unknown_fields,
    from = "RawInitialCondition"
)]
pub enum InitialCondition {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude exp(-(x - center)^2 / (2 width^2))`.
    GaussianBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// Smoothed indicator of `[-half_width, half_width]`:
    /// `amplitude (tanh((x + a) / s) - tanh((x - a) / s)) / 2`.
    SmoothedStep {
        amplitude: f64,
        half_width: f64,
        smoothing: f64,
    },
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Zero => true,
            Self::Constant { value } => value.is_finite(),
            Self::GaussianBump {
                amplitude,
                width,
                center,
            } => amplitude.is_finite() && center.is_finite() && width > 0.0 && width.is_finite(),
            Self::SmoothedStep {
                amplitude,
                half_width,
                smoothing,
            } => {
                amplitude.is_finite()
                    && half_width > 0.0
                    && half_width.is_finite()
                    && smoothing > 0.0
                    && smoothing.is_finite()
            }
        };
        if !ok {
            return Err(config(format!("invalid initial condition {self:?}")));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Constant { value } => value,
            Self::GaussianBump {
                amplitude,
                width,
                center,
            } => {
                let z = (x - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            Self::SmoothedStep {
                amplitude,
                half_width,
                smoothing,
            } => {
                0.5 * amplitude
                    * (((x + half_width) / smoothing).tanh()
                        - ((x - half_width) / smoothing).tanh())
            }
        }
    }

    /// `sup |u_0|`.
    pub fn sup_norm(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Constant { value } => value.abs(),
            Self::GaussianBump { amplitude, .. } => amplitude.abs(),
            Self::SmoothedStep {
                amplitude,
                half_width,
                smoothing,
            } => amplitude.abs() * (half_width / smoothing).tanh(),
        }
    }
}

// Internally tagged unit variants accept any extra keys, so configs are read
// through mirrors whose field-free variants are empty structs.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawCoefficientSpec {
    Zero {},
    Linear {},
    ConstantSigma { sigma: f64 },
    SineTanh { alpha: f64, beta: f64, gamma: f64 },
    SqrtGrowth {},
    DeterministicTanh { gamma: f64 },
}

impl From<RawCoefficientSpec> for CoefficientSpec {
    fn from(raw: RawCoefficientSpec) -> Self {
        match raw {
            RawCoefficientSpec::Zero {} => Self::Zero,
            RawCoefficientSpec::Linear {} => Self::Linear,
            RawCoefficientSpec::ConstantSigma { sigma } => Self::ConstantSigma { sigma },
            RawCoefficientSpec::SineTanh { alpha, beta, gamma } => {
                Self::SineTanh { alpha, beta, gamma }
            }
            RawCoefficientSpec::SqrtGrowth {} => Self::SqrtGrowth,
            RawCoefficientSpec::DeterministicTanh { gamma } => Self::DeterministicTanh { gamma },
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawInitialCondition {
    Zero {},
    Constant {
        value: f64,
    },
    GaussianBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    SmoothedStep {
        amplitude: f64,
        half_width: f64,
        smoothing: f64,
    },
}

impl From<RawInitialCondition> for InitialCondition {
    fn from(raw: RawInitialCondition) -> Self {
        match raw {
            RawInitialCondition::Zero {} => Self::Zero,
            RawInitialCondition::Constant { value } => Self::Constant { value },
            RawInitialCondition::GaussianBump {
                amplitude,
                width,
                center,
            } => Self::GaussianBump {
                amplitude,
                width,
                center,
            },
            RawInitialCondition::SmoothedStep {
                amplitude,
                half_width,
                smoothing,
            } => Self::SmoothedStep {
                amplitude,
                half_width,
                smoothing,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const REGISTRY: [CoefficientSpec; 6] = [
        CoefficientSpec::Zero,
        CoefficientSpec::Linear,
        CoefficientSpec::ConstantSigma { sigma: -0.7 },
        CoefficientSpec::SineTanh {
            alpha: 1.0,
            beta: 0.5,
            gamma: 0.5,
        },
        CoefficientSpec::SqrtGrowth,
        CoefficientSpec::DeterministicTanh { gamma: 0.8 },
    ];

    proptest! {
        #[test]
        fn registry_is_lipschitz_with_linear_growth(u in -50.0f64..50.0, v in -50.0f64..50.0) {
            for spec in REGISTRY {
                let c = Coefficients::from(spec);
                let k = spec.lipschitz_const();
                let lip = (c.sigma(0.0, 0.0, u) - c.sigma(0.0, 0.0, v)).abs()
                    + (c.drift(0.0, 0.0, u) - c.drift(0.0, 0.0, v)).abs();
                prop_assert!(lip <= k * (u - v).abs() * (1.0 + 1e-12) + 1e-15, "{spec:?}");
                let growth = c.sigma(0.0, 0.0, u).abs() + c.drift(0.0, 0.0, u).abs();
                prop_assert!(growth <= k * (1.0 + u.abs()) * (1.0 + 1e-12), "{spec:?}");
            }
        }

        #[test]
        fn initial_data_bounded_by_sup_norm(x in -10.0f64..10.0) {
            let ics = [
                InitialCondition::Constant { value: -2.0 },
                InitialCondition::GaussianBump { amplitude: 1.5, width: 0.3, center: 0.2 },
                InitialCondition::SmoothedStep { amplitude: 2.0, half_width: 0.5, smoothing: 0.1 },
            ];
            for ic in ics {
                prop_assert!(ic.eval(x).abs() <= ic.sup_norm() * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn registry_parses_from_toml() {
        let spec: CoefficientSpec =
            toml::from_str("kind = \"sine-tanh\"\nalpha = 1.0\nbeta = 0.5\ngamma = 0.5").unwrap();
        assert_eq!(
            spec,
            CoefficientSpec::SineTanh {
                alpha: 1.0,
                beta: 0.5,
                gamma: 0.5
            }
        );
        assert!(toml::from_str::<CoefficientSpec>("kind = \"linear\"\nextra = 1").is_err());
        assert!(toml::from_str::<CoefficientSpec>("kind = \"sine-tanh\"\nalpha = 1.0").is_err());
        assert!(toml::from_str::<InitialCondition>("kind = \"zero\"\nvalue = 1.0").is_err());
        let zero: InitialCondition = toml::from_str("kind = \"zero\"").unwrap();
        assert_eq!(zero, InitialCondition::Zero);
        let ic: InitialCondition =
            toml::from_str("kind = \"gaussian-bump\"\namplitude = 1.0\nwidth = 0.5").unwrap();
        assert_eq!(ic.sup_norm(), 1.0);
    }

    #[test]
    fn classification() {
        assert!(Coefficients::from(CoefficientSpec::Linear).is_linear());
        assert!(Coefficients::from(CoefficientSpec::Zero).is_zero());
        assert!(
            Coefficients::from(CoefficientSpec::DeterministicTanh { gamma: 0.5 }).is_noiseless()
        );
        let custom = Coefficients::custom(|_, _, u| u, |_, _, _| 0.0, 1.0);
        assert!(!custom.is_linear());
        assert_eq!(custom.sigma(0.0, 0.0, 2.0), 2.0);
    }
}
