//! How a predictor enters the design: as itself, as threshold dummies, or not at all.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "EncodingRepr", try_from = "EncodingRepr")]
pub enum Encoding {
    Linear,
    /// `I(x >= cut)`.
    SingleSplit(f64),
    /// `I(lo <= x < hi)` and `I(x >= hi)`; the lowest segment is the reference.
    DoubleSplit(f64, f64),
    Excluded,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Linear,
    Single,
    Double,
    Excluded,
}

#[derive(Serialize, Deserialize)]
struct EncodingRepr {
    kind: Kind,
    cuts: Vec<f64>,
}

impl From<Encoding> for EncodingRepr {
    fn from(e: Encoding) -> Self {
        let (kind, cuts) = match e {
            Encoding::Linear => (Kind::Linear, vec![]),
            Encoding::SingleSplit(c) => (Kind::Single, vec![c]),
            Encoding::DoubleSplit(lo, hi) => (Kind::Double, vec![lo, hi]),
            Encoding::Excluded => (Kind::Excluded, vec![]),
        };
        EncodingRepr { kind, cuts }
    }
}

impl TryFrom<EncodingRepr> for Encoding {
    type Error = String;
    fn try_from(r: EncodingRepr) -> std::result::Result<Self, String> {
        match (r.kind, r.cuts.as_slice()) {
            (Kind::Linear, []) => Ok(Encoding::Linear),
            (Kind::Excluded, []) => Ok(Encoding::Excluded),
            (Kind::Single, &[c]) => Ok(Encoding::SingleSplit(c)),
            (Kind::Double, &[lo, hi]) if lo < hi => Ok(Encoding::DoubleSplit(lo, hi)),
            _ => Err("cuts do not match the encoding kind".into()),
        }
    }
}

impl Encoding {
    pub fn n_columns(&self) -> usize {
        match self {
            Encoding::Linear | Encoding::SingleSplit(_) => 1,
            Encoding::DoubleSplit(..) => 2,
            Encoding::Excluded => 0,
        }
    }

    pub fn is_dummy(&self) -> bool {
        matches!(self, Encoding::SingleSplit(_) | Encoding::DoubleSplit(..))
    }

    /// Rank used for "simpler wins" tie-breaks.
    pub fn complexity(&self) -> u8 {
        match self {
            Encoding::Excluded => 0,
            Encoding::Linear => 1,
            Encoding::SingleSplit(_) => 2,
            Encoding::DoubleSplit(..) => 3,
        }
    }

    pub fn column_names(&self, name: &str) -> Vec<String> {
        match self {
            Encoding::Linear => vec![name.to_string()],
            Encoding::SingleSplit(_) => vec![format!("{name}_dummy")],
            Encoding::DoubleSplit(..) => vec![format!("{name}_dummy1"), format!("{name}_dummy2")],
            Encoding::Excluded => vec![],
        }
    }

    pub fn short_label(&self) -> String {
        match self {
            Encoding::Linear => "linear".into(),
            Encoding::SingleSplit(c) => format!("x >= {c:.3}"),
            Encoding::DoubleSplit(lo, hi) => format!("{lo:.3} <= x < {hi:.3} | x >= {hi:.3}"),
            Encoding::Excluded => "excluded".into(),
        }
    }
}

fn indicator(x: &[f64], f: impl Fn(f64) -> bool) -> Vec<f64> {
    x.iter().map(|&v| if f(v) { 1.0 } else { 0.0 }).collect()
}

/// Columns produced by `enc`, without the constant-column check.
/// Used when applying a fitted plan to new data.
pub fn encode_columns(x: &[f64], name: &str, enc: &Encoding) -> Vec<(String, Vec<f64>)> {
    let names = enc.column_names(name);
    let cols = match *enc {
        Encoding::Linear => vec![x.to_vec()],
        Encoding::SingleSplit(c) => vec![indicator(x, |v| v >= c)],
        Encoding::DoubleSplit(lo, hi) => vec![
            indicator(x, |v| lo <= v && v < hi),
            indicator(x, |v| v >= hi),
        ],
        Encoding::Excluded => vec![],
    };
    names.into_iter().zip(cols).collect()
}

/// Encodes `x`; a dummy column that is all zeros or all ones is an error.
pub fn apply_encoding(x: &[f64], name: &str, enc: &Encoding) -> Result<Vec<(String, Vec<f64>)>> {
    if let Encoding::DoubleSplit(lo, hi) = *enc {
        if lo >= hi {
            return Err(Error::InvalidConfig(format!(
                "double split cuts out of order: {lo} >= {hi}"
            )));
        }
    }
    let cols = encode_columns(x, name, enc);
    if enc.is_dummy() {
        for (col_name, col) in &cols {
            let ones = col.iter().filter(|&&v| v == 1.0).count();
            if ones == 0 || ones == col.len() {
                return Err(Error::DegenerateEncoding {
                    column: col_name.clone(),
                });
            }
        }
    }
    Ok(cols)
}

/// Lines of the "Dummy-Encoded Variables" summary block. Cuts print with 3 decimals.
pub fn describe_encoding(name: &str, enc: &Encoding) -> Vec<String> {
    match *enc {
        Encoding::SingleSplit(c) => vec![format!("{name} : 1 if x >= {c:.3}; else 0")],
        Encoding::DoubleSplit(lo, hi) => vec![
            format!("{name} : 1 if {lo:.3} < x < {hi:.3}; else 0"),
            format!("{name} : 1 if x >= {hi:.3}; else 0"),
        ],
        Encoding::Linear | Encoding::Excluded => vec![],
    }
}

/// Variable name to encoding, in formula term order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransformPlan(IndexMap<String, Encoding>);

impl TransformPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Encoding> {
        self.0.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Encoding)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Inserts or replaces, keeping entries ordered as in `order`.
    pub fn set(&mut self, var: &str, enc: Encoding, order: &[String]) {
        self.0.insert(var.to_string(), enc);
        let rank = |k: &str| order.iter().position(|o| o == k).unwrap_or(usize::MAX);
        self.0.sort_by(|a, _, b, _| rank(a).cmp(&rank(b)).then_with(|| a.cmp(b)));
    }

    /// Appends without reordering.
    pub fn push(&mut self, var: &str, enc: Encoding) {
        self.0.insert(var.to_string(), enc);
    }

    pub fn remove(&mut self, var: &str) -> Option<Encoding> {
        self.0.shift_remove(var)
    }
}

impl FromIterator<(String, Encoding)> for TransformPlan {
    fn from_iter<T: IntoIterator<Item = (String, Encoding)>>(iter: T) -> Self {
        TransformPlan(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_split_mtcars_pair() {
        let cols = apply_encoding(&[95.1, 108.0], "disp", &Encoding::SingleSplit(101.55)).unwrap();
        assert_eq!(cols, vec![("disp_dummy".to_string(), vec![0.0, 1.0])]);
    }

    #[test]
    fn linear_is_identity_and_excluded_is_empty() {
        let x = [3.0, -1.0, 2.5];
        assert_eq!(
            apply_encoding(&x, "v", &Encoding::Linear).unwrap(),
            vec![("v".to_string(), x.to_vec())]
        );
        assert!(apply_encoding(&x, "v", &Encoding::Excluded).unwrap().is_empty());
    }

    #[test]
    fn double_split_segments() {
        let cols = apply_encoding(&[1.0, 5.0, 9.0], "z", &Encoding::DoubleSplit(3.0, 7.0)).unwrap();
        assert_eq!(cols[0], ("z_dummy1".to_string(), vec![0.0, 1.0, 0.0]));
        assert_eq!(cols[1], ("z_dummy2".to_string(), vec![0.0, 0.0, 1.0]));
    }

    #[test]
    fn constant_dummy_is_degenerate() {
        let err = apply_encoding(&[1.0, 2.0], "a", &Encoding::SingleSplit(5.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateEncoding { column } if column == "a_dummy"));
        let err = apply_encoding(&[1.0, 2.0, 9.0], "a", &Encoding::DoubleSplit(3.0, 7.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateEncoding { column } if column == "a_dummy1"));
    }

    #[test]
    fn descriptions() {
        assert_eq!(
            describe_encoding("drat", &Encoding::SingleSplit(3.035)),
            vec!["drat : 1 if x >= 3.035; else 0"]
        );
        assert_eq!(
            describe_encoding("wt", &Encoding::DoubleSplit(1.885, 3.013))[0],
            "wt : 1 if 1.885 < x < 3.013; else 0"
        );
        assert_eq!(
            describe_encoding("disp", &Encoding::SingleSplit(101.55)),
            vec!["disp : 1 if x >= 101.550; else 0"]
        );
        assert_eq!(
            describe_encoding("z", &Encoding::SingleSplit(0.0005)),
            vec!["z : 1 if x >= 0.001; else 0"]
        );
        assert!(describe_encoding("z", &Encoding::Linear).is_empty());
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&Encoding::DoubleSplit(1.5, 5.0)).unwrap();
        assert_eq!(s, r#"{"kind":"double","cuts":[1.5,5.0]}"#);
        let back: Encoding = serde_json::from_str(&s).unwrap();
        assert_eq!(back, Encoding::DoubleSplit(1.5, 5.0));
        assert!(serde_json::from_str::<Encoding>(r#"{"kind":"single","cuts":[]}"#).is_err());

        let order = vec!["b".to_string(), "a".to_string()];
        let mut plan = TransformPlan::new();
        plan.set("a", Encoding::Linear, &order);
        plan.set("b", Encoding::SingleSplit(2.0), &order);
        assert_eq!(
            serde_json::to_string(&plan).unwrap(),
            r#"{"b":{"kind":"single","cuts":[2.0]},"a":{"kind":"linear","cuts":[]}}"#
        );
    }

    proptest::proptest! {
        #[test]
        fn column_counts_and_disjointness(
            xs in proptest::collection::vec(-100i32..100, 3..60),
            a in 0usize..60, b in 0usize..60,
        ) {
            let x: Vec<f64> = xs.iter().map(|&v| f64::from(v)).collect();
            let mut sorted = x.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            proptest::prop_assume!(sorted.len() >= 3);
            let mids: Vec<f64> = sorted.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
            let (i, j) = (a % mids.len(), b % mids.len());
            proptest::prop_assume!(i != j);
            let (lo, hi) = (mids[i.min(j)], mids[i.max(j)]);

            for enc in [Encoding::Linear, Encoding::SingleSplit(lo), Encoding::DoubleSplit(lo, hi), Encoding::Excluded] {
                let cols = encode_columns(&x, "v", &enc);
                proptest::prop_assert_eq!(cols.len(), enc.n_columns());
            }
            let cols = encode_columns(&x, "v", &Encoding::DoubleSplit(lo, hi));
            for k in 0..x.len() {
                proptest::prop_assert_eq!(cols[0].1[k] * cols[1].1[k], 0.0);
                let upper = if x[k] >= lo { 1.0 } else { 0.0 };
                proptest::prop_assert_eq!(cols[0].1[k] + cols[1].1[k], upper);
                // Midpoint cuts: strict and non-strict comparisons agree on observed data.
                proptest::prop_assert_eq!(x[k] >= lo, x[k] > lo);
                proptest::prop_assert_eq!(x[k] >= hi, x[k] > hi);
            }
        }
    }
}
