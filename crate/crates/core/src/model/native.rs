use serde::Deserialize;

use super::FeatureModel;
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NativeModel {
    features: Vec<String>,
    clauses: Vec<Vec<i32>>,
}

/// Parses the native JSON format:
/// `{"features": ["a", "b"], "clauses": [[1, 2]]}`.
pub fn parse_native(text: &str) -> Result<FeatureModel> {
    let raw: NativeModel =
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    FeatureModel::new(raw.features, raw.clauses)
}

/// Canonical native serialization: features in index order, clause
/// literals in stored order, one space after each `:` and `,`, trailing
/// newline.
pub fn serialize_native(fm: &FeatureModel) -> String {
    let names: Vec<String> = fm
        .features()
        .iter()
        .map(|n| serde_json::to_string(n).expect("strings always serialize"))
        .collect();
    let clauses: Vec<String> = fm
        .clauses()
        .iter()
        .map(|c| {
            let lits: Vec<String> = c.iter().map(i32::to_string).collect();
            format!("[{}]", lits.join(", "))
        })
        .collect();
    format!(
        "{{\"features\": [{}], \"clauses\": [{}]}}\n",
        names.join(", "),
        clauses.join(", ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_random_model;
    use proptest::prelude::*;

    #[test]
    fn two_features_one_clause() {
        let fm = parse_native(r#"{"features":["a","b"],"clauses":[[1,2]]}"#).unwrap();
        assert_eq!(fm.features(), &["a", "b"]);
        assert_eq!(fm.clauses(), &[vec![1, 2]]);
        assert_eq!(
            serialize_native(&fm),
            "{\"features\": [\"a\", \"b\"], \"clauses\": [[1, 2]]}\n"
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_native(r#"{"features":["a","a"],"clauses":[]}"#),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            parse_native(r#"{"features":["a"],"clauses":[[2]]}"#),
            Err(Error::LiteralOutOfRange { .. })
        ));
        assert!(matches!(
            parse_native("{\n\"features\": [\"a\",]\n}"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_native(r#"{"features":[],"clauses":[],"extra":1}"#).is_err());
    }

    #[test]
    fn awkward_names_survive() {
        let fm = FeatureModel::new(vec!["a \"quoted\", name".into(), "ü".into()], vec![vec![-2]])
            .unwrap();
        assert_eq!(parse_native(&serialize_native(&fm)).unwrap(), fm);
    }

    proptest! {
        #[test]
        fn canonical_round_trip(n in 2usize..20, density in 0.0f64..1.5, seed in any::<u64>()) {
            let fm = generate_random_model(n, density, seed).unwrap();
            let text = serialize_native(&fm);
            let back = parse_native(&text).unwrap();
            prop_assert_eq!(&back, &fm);
            prop_assert_eq!(serialize_native(&back), text);
        }
    }
}
