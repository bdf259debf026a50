//! Labels on the impact × activity plane.

use std::fmt;
use std::str::FromStr;

use bigdecimal::BigDecimal;
use serde::{Deserialize, Serialize};

use super::{BaselineFlags, LsisValue};
use crate::decimal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    LinchpinWhale,
    DormantLinchpin,
    ActiveCriticalWhale,
    DormantCriticalWhale,
    FalsePositiveWhale,
    NonWhale,
}

impl Label {
    pub const ALL: [Label; 6] = [
        Label::LinchpinWhale,
        Label::DormantLinchpin,
        Label::ActiveCriticalWhale,
        Label::DormantCriticalWhale,
        Label::FalsePositiveWhale,
        Label::NonWhale,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::LinchpinWhale => "LinchpinWhale",
            Label::DormantLinchpin => "DormantLinchpin",
            Label::ActiveCriticalWhale => "ActiveCriticalWhale",
            Label::DormantCriticalWhale => "DormantCriticalWhale",
            Label::FalsePositiveWhale => "FalsePositiveWhale",
            Label::NonWhale => "NonWhale",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown label {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Below this, the score counts as zero.
    pub lsis_epsilon: BigDecimal,
    pub lsis_significant: BigDecimal,
    pub lsis_linchpin: BigDecimal,
    /// Largest ETWL rank still considered active.
    pub active_rank_max: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            lsis_epsilon: BigDecimal::new(1.into(), 3),
            lsis_significant: BigDecimal::new(1.into(), 2),
            lsis_linchpin: BigDecimal::from(4),
            active_rank_max: 500,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !decimal::is_positive(&self.lsis_epsilon)
            || self.lsis_epsilon >= self.lsis_significant
            || self.lsis_significant >= self.lsis_linchpin
        {
            return Err(Error::InvalidArgument(format!(
                "thresholds must satisfy 0 < epsilon < significant < linchpin (got {}, {}, {})",
                self.lsis_epsilon, self.lsis_significant, self.lsis_linchpin
            )));
        }
        if self.active_rank_max == 0 {
            return Err(Error::InvalidArgument("active rank cutoff must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn classify(lsis: &LsisValue, etwl_rank: usize, flags: BaselineFlags, cfg: &ClassifierConfig) -> Label {
    let dormant = etwl_rank > cfg.active_rank_max;
    let value = match lsis {
        LsisValue::Unbounded => {
            return if dormant {
                Label::DormantLinchpin
            } else {
                Label::LinchpinWhale
            };
        }
        LsisValue::Finite(v) => v,
    };
    if *value < cfg.lsis_epsilon {
        if flags.any() {
            Label::FalsePositiveWhale
        } else {
            Label::NonWhale
        }
    } else if *value >= cfg.lsis_linchpin {
        if dormant {
            Label::DormantLinchpin
        } else {
            Label::LinchpinWhale
        }
    } else if *value >= cfg.lsis_significant {
        if dormant {
            Label::DormantCriticalWhale
        } else {
            Label::ActiveCriticalWhale
        }
    } else {
        Label::NonWhale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> LsisValue {
        LsisValue::Finite(s.parse().unwrap())
    }

    const NONE: BaselineFlags = BaselineFlags {
        b1: false,
        b2: false,
        b3: false,
    };

    #[test]
    fn bands() {
        let cfg = ClassifierConfig::default();
        cfg.validate().unwrap();
        assert_eq!(classify(&f("0.0005"), 3, NONE, &cfg), Label::NonWhale);
        let b1 = BaselineFlags { b1: true, ..NONE };
        assert_eq!(classify(&f("0"), 3, b1, &cfg), Label::FalsePositiveWhale);
        assert_eq!(classify(&f("-0.2"), 3, b1, &cfg), Label::FalsePositiveWhale);
        assert_eq!(classify(&f("0.005"), 3, b1, &cfg), Label::NonWhale);
        assert_eq!(classify(&f("0.01"), 500, NONE, &cfg), Label::ActiveCriticalWhale);
        assert_eq!(classify(&f("0.01"), 501, NONE, &cfg), Label::DormantCriticalWhale);
        assert_eq!(classify(&f("4"), 1, NONE, &cfg), Label::LinchpinWhale);
        assert_eq!(classify(&f("4"), 900, NONE, &cfg), Label::DormantLinchpin);
        assert_eq!(classify(&LsisValue::Unbounded, 2, NONE, &cfg), Label::LinchpinWhale);
        assert_eq!(classify(&LsisValue::Unbounded, 600, NONE, &cfg), Label::DormantLinchpin);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ClassifierConfig::default();
        cfg.lsis_significant = cfg.lsis_linchpin.clone();
        assert!(cfg.validate().is_err());
        let cfg = ClassifierConfig {
            active_rank_max: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn label_names_round_trip() {
        for l in Label::ALL {
            assert_eq!(l.as_str().parse::<Label>().unwrap(), l);
        }
        assert!("Whale".parse::<Label>().is_err());
    }
}
