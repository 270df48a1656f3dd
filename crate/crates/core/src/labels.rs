//! Serde helpers writing 0-based sensor indices as 1-based labels.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
    v.iter().map(|i| i + 1).collect::<Vec<_>>().serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
    let labels = Vec::<usize>::deserialize(d)?;
    labels
        .into_iter()
        .map(|l| l.checked_sub(1).ok_or_else(|| serde::de::Error::custom("sensor labels start at 1")))
        .collect()
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Vec<usize>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.iter().map(|i| i + 1).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<usize>>, D::Error> {
        Option::<Vec<usize>>::deserialize(d)?
            .map(|labels| {
                labels
                    .into_iter()
                    .map(|l| l.checked_sub(1).ok_or_else(|| serde::de::Error::custom("sensor labels start at 1")))
                    .collect()
            })
            .transpose()
    }
}

pub mod one {
    use super::*;

    pub fn serialize<S: Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
        (v + 1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        usize::deserialize(d)?.checked_sub(1).ok_or_else(|| serde::de::Error::custom("sensor labels start at 1"))
    }
}
