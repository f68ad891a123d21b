use std::collections::BTreeMap;

use proptest::prelude::*;
use tflp::config::{parse_range, RunConfig};
use tflp::csvio::{fmt_real, Table};
use tflp::ensemble::{member_seed, Moments};

const DEFAULTS: &[(&str, &str)] = &[("d", "0.3"), ("lambda", "0.5"), ("seed", "1")];

fn map(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[test]
fn range_endpoints() {
    assert_eq!(parse_range("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert_eq!(parse_range("2").unwrap(), vec![2.0]);
    assert!(parse_range("1:0:0.1").is_err());
    assert!(parse_range("0:1:0").is_err());
    assert!(parse_range("0:1").is_err());
}

#[test]
fn moments_of_known_sample() {
    let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m.mean, 2.5);
    assert!((m.var - 5.0 / 3.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn reals_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_real(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn tables_round_trip(rows in proptest::collection::vec(proptest::array::uniform3(-1e12f64..1e12), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["t", "a", "b"], &["time", "1", "EL2-scaled"]);
        for r in &rows {
            t.push(r.to_vec());
        }
        t.write(&path).unwrap();
        prop_assert_eq!(Table::read(&path).unwrap(), t);
    }

    #[test]
    fn flags_override_file_override_defaults(file_d in proptest::option::of(-0.4f64..0.4), flag_d in proptest::option::of(-0.4f64..0.4)) {
        let file = map(&file_d.map(|v| vec![("d", v.to_string())]).unwrap_or_default());
        let flags = map(&flag_d.map(|v| vec![("d", v.to_string())]).unwrap_or_default());
        let c = RunConfig::resolve(DEFAULTS, &file, &flags).unwrap();
        let want = flag_d.or(file_d).unwrap_or(0.3);
        prop_assert_eq!(c.real("d").unwrap(), want);
        prop_assert_eq!(c.real("lambda").unwrap(), 0.5);
    }

    #[test]
    fn unknown_keys_rejected(key in "[a-z]{3,8}") {
        prop_assume!(!DEFAULTS.iter().any(|(k, _)| *k == key));
        let file = map(&[(key.as_str(), "1".to_string())]);
        prop_assert!(RunConfig::resolve(DEFAULTS, &file, &BTreeMap::new()).is_err());
    }

    #[test]
    fn member_seeds_distinct(base in any::<u64>(), i in 0u64..1_000_000, j in 0u64..1_000_000) {
        prop_assume!(i != j);
        prop_assert_ne!(member_seed(base, i), member_seed(base, j));
    }
}
