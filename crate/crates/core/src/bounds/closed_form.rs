use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TauConnectivity {
    Full,
    Local {
        #[serde(rename = "L")]
        interferers: usize,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRestriction {
    /// Any message assignment and any scheme.
    #[default]
    None,
    /// Transmit sets confined to a vanishing neighbourhood of the message index.
    LocalCooperation,
    /// Zero-forcing schemes under interference avoidance.
    ZeroForcing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauSetting {
    pub connectivity: TauConnectivity,
    #[serde(rename = "M")]
    pub cooperation: usize,
    #[serde(default)]
    pub restriction: TauRestriction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauKind {
    Exact,
    UpperBound,
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TauValue {
    pub value: Rational64,
    pub kind: TauKind,
}

impl fmt::Display for TauValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            TauKind::Exact => "exact",
            TauKind::UpperBound => "upper bound",
            TauKind::LowerBound => "lower bound",
        };
        write!(f, "{} ({kind})", self.value)
    }
}

fn ratio(num: usize, den: usize) -> Rational64 {
    Rational64::new(num as i64, den as i64)
}

fn exact(value: Rational64) -> TauValue {
    TauValue {
        value,
        kind: TauKind::Exact,
    }
}

/// Asymptotic per-user DoF for the given setting, with whether the value is
/// known exactly or only bounded.
pub fn closed_form_tau(setting: TauSetting) -> Result<TauValue> {
    let m = setting.cooperation;
    if m == 0 {
        return Err(Error::UnknownSetting("cooperation order must be at least 1".into()));
    }
    let half = Rational64::new(1, 2);
    match (setting.connectivity, setting.restriction) {
        (TauConnectivity::Full, TauRestriction::ZeroForcing) => Err(Error::UnknownSetting(
            "no zero-forcing characterization for fully connected channels".into(),
        )),
        (TauConnectivity::Full, TauRestriction::LocalCooperation) => Ok(exact(half)),
        (TauConnectivity::Full, TauRestriction::None) => Ok(match m {
            1 | 2 => exact(half),
            3 => TauValue {
                value: ratio(5, 8),
                kind: TauKind::UpperBound,
            },
            _ => TauValue {
                value: ratio(m - 1, m),
                kind: TauKind::UpperBound,
            },
        }),
        (TauConnectivity::Local { interferers: 0 }, _) => Err(Error::UnknownSetting(
            "locally connected channels need L >= 1".into(),
        )),
        (TauConnectivity::Local { interferers: l }, TauRestriction::ZeroForcing) => Ok(exact(ratio(2 * m, 2 * m + l))),
        // Local cooperation loses nothing on locally connected channels.
        (TauConnectivity::Local { interferers: l }, TauRestriction::None | TauRestriction::LocalCooperation) => {
            Ok(if l == 1 {
                exact(ratio(2 * m, 2 * m + 1))
            } else if m == 1 {
                exact(half)
            } else {
                TauValue {
                    value: ratio(2 * m, 2 * m + l).max(half),
                    kind: TauKind::LowerBound,
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(connectivity: TauConnectivity, m: usize, restriction: TauRestriction) -> TauValue {
        closed_form_tau(TauSetting {
            connectivity,
            cooperation: m,
            restriction,
        })
        .unwrap()
    }

    #[test]
    fn display_format() {
        let v = tau(TauConnectivity::Local { interferers: 1 }, 2, TauRestriction::None);
        assert_eq!(v.to_string(), "4/5 (exact)");
        let v = tau(TauConnectivity::Full, 3, TauRestriction::None);
        assert_eq!(v.to_string(), "5/8 (upper bound)");
    }

    #[test]
    fn unknown_settings() {
        for setting in [
            TauSetting {
                connectivity: TauConnectivity::Full,
                cooperation: 0,
                restriction: TauRestriction::None,
            },
            TauSetting {
                connectivity: TauConnectivity::Local { interferers: 0 },
                cooperation: 2,
                restriction: TauRestriction::None,
            },
            TauSetting {
                connectivity: TauConnectivity::Full,
                cooperation: 2,
                restriction: TauRestriction::ZeroForcing,
            },
        ] {
            assert!(matches!(closed_form_tau(setting), Err(Error::UnknownSetting(_))));
        }
    }

    #[test]
    fn json_setting() {
        let s: TauSetting = serde_json::from_str(r#"{"connectivity":{"kind":"local","L":2},"M":1}"#).unwrap();
        assert_eq!(s.restriction, TauRestriction::None);
        assert_eq!(closed_form_tau(s).unwrap().value, Rational64::new(1, 2));
    }
}
