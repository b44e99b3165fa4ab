//! Serde helpers writing `Rational64` as `{"num": n, "den": d}`.

use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Repr {
    num: i64,
    den: i64,
}

impl From<&Rational64> for Repr {
    fn from(r: &Rational64) -> Self {
        Repr {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl Repr {
    fn into_rational<E: serde::de::Error>(self) -> Result<Rational64, E> {
        if self.den == 0 {
            return Err(E::custom("zero denominator"));
        }
        Ok(Rational64::new(self.num, self.den))
    }
}

pub fn serialize<S: Serializer>(value: &Rational64, serializer: S) -> Result<S::Ok, S::Error> {
    Repr::from(value).serialize(serializer)
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational64, D::Error> {
    Repr::deserialize(deserializer)?.into_rational()
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[Rational64], serializer: S) -> Result<S::Ok, S::Error> {
        values.iter().map(Repr::from).collect::<Vec<_>>().serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<Rational64>, D::Error> {
        Vec::<Repr>::deserialize(deserializer)?
            .into_iter()
            .map(Repr::into_rational)
            .collect()
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Option<Rational64>, serializer: S) -> Result<S::Ok, S::Error> {
        value.as_ref().map(Repr::from).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Rational64>, D::Error> {
        Option::<Repr>::deserialize(deserializer)?
            .map(Repr::into_rational)
            .transpose()
    }
}
