use std::fmt;

use serde::Serialize;

use crate::linalg::GramMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Rho1,
    Piplus,
    Ratio,
    GammaPlusUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactEnumeration,
    Multistart,
    Witness,
    DualAp,
    Rank1Witness,
    Structured,
    Eigen,
    Peel,
}

/// Strength of a reported bound, ordered weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Heuristic,
    CertifiedBound,
    Exact,
}

macro_rules! snake_display {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
                f.write_str(s.as_str().unwrap_or_default())
            }
        }
    )*};
}
snake_display!(Quantity, Method, Certificate);

#[derive(Debug, Clone)]
pub enum Witness {
    Vector(Vec<f64>),
    Matrix(GramMatrix),
}

/// Lower/upper values for one quantity, how they were obtained, and how far
/// they can be trusted.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub quantity: Quantity,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub method: Method,
    pub certificate: Certificate,
    #[serde(skip)]
    pub witness: Option<Witness>,
    /// Side file holding the witness in the matrix text format.
    #[serde(rename = "witness-path", skip_serializing_if = "Option::is_none")]
    pub witness_path: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl BoundReport {
    pub fn new(quantity: Quantity, method: Method, certificate: Certificate) -> Self {
        Self {
            quantity,
            lower: None,
            upper: None,
            method,
            certificate,
            witness: None,
            witness_path: None,
            flags: Vec::new(),
        }
    }

    pub fn with_lower(mut self, v: f64) -> Self {
        self.lower = Some(v);
        self
    }

    pub fn with_upper(mut self, v: f64) -> Self {
        self.upper = Some(v);
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn flag(mut self, f: impl Into<String>) -> Self {
        self.flags.push(f.into());
        self
    }

    pub fn has_flag(&self, f: &str) -> bool {
        self.flags.iter().any(|x| x == f)
    }

    /// The best single number: the exact value, the upper bound, or the lower one.
    pub fn value(&self) -> Option<f64> {
        match (self.lower, self.upper) {
            (_, Some(u)) => Some(u),
            (Some(l), None) => Some(l),
            _ => None,
        }
    }

    /// `lower <= upper + 1e-9`, and exact reports are tight to `1e-6` relative.
    pub fn check_invariants(&self) -> Result<(), String> {
        if let (Some(l), Some(u)) = (self.lower, self.upper) {
            if l > u + 1e-9 {
                return Err(format!("lower {l} exceeds upper {u}"));
            }
            if self.certificate == Certificate::Exact && u - l > 1e-6 * u.abs().max(1.0) {
                return Err(format!("exact report has gap {}", u - l));
            }
        } else if self.certificate == Certificate::Exact {
            return Err("exact report needs both bounds".into());
        }
        Ok(())
    }
}
