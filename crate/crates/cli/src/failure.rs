//! Failures sorted by exit code: bad inputs exit 2, numerical trouble exits 3.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    Precondition(String),
    Numerical(String),
}

impl Failure {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Failure::Precondition(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Failure::Numerical(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Precondition(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Precondition(m) => write!(f, "precondition failed: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<cavspin::Error> for Failure {
    fn from(e: cavspin::Error) -> Self {
        if e.is_precondition() {
            Failure::Precondition(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let bad = cavspin::Error::InvalidParameter("kappa".into());
        assert_eq!(Failure::from(bad).exit_code(), 2);
        let guard = cavspin::Error::Revival { revival_time: 1.0, required: 4.0 };
        assert_eq!(Failure::from(guard).exit_code(), 2);
        let stuck = cavspin::Error::NonConvergence { iterates: vec![Complex64::new(-1.0, 0.0)] };
        assert_eq!(Failure::from(stuck).exit_code(), 3);
        let step = cavspin::Error::StepSize { t: 1.0, step: 1e-300, reason: "underflow".into() };
        assert_eq!(Failure::from(step).exit_code(), 3);
    }
}
