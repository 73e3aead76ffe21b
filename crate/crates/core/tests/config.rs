use aacs::config::{parse_epsilon_list, OperatorKind, RunConfig};
use aacs::dynamics::BoundForm;
use aacs::error::Error;
use aacs::family::{gaussian_family, FamilyDocument, ProbabilityFamily};
use aacs::quantizer::AlphaRule;
use proptest::prelude::*;

#[test]
fn empty_object_is_the_default_config() {
    let c = RunConfig::from_json("{}").unwrap();
    assert_eq!(c, RunConfig::default());
    assert_eq!(c.window.nmax, 32);
    assert_eq!(c.bound_form, BoundForm::Coherent);
}

#[test]
fn unknown_fields_are_rejected() {
    assert!(matches!(
        RunConfig::from_json(r#"{"windw": {}}"#),
        Err(Error::InvalidConfig(_))
    ));
    assert!(matches!(
        RunConfig::from_json(r#"{"grid": {"j_node": 3}}"#),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn explicit_empty_sweep_is_rejected() {
    assert!(RunConfig::from_json(r#"{"epsilon_list": []}"#).is_err());
}

#[test]
fn epsilon_list_rejects_bad_items() {
    for bad in ["", " ", "1,,2", "a", "1,-2", "0", "inf", "NaN", "1;2"] {
        assert!(parse_epsilon_list(bad).is_err(), "{bad:?}");
    }
    assert_eq!(parse_epsilon_list(" 0.1, 2 ,1e1").unwrap(), vec![0.1, 2.0, 10.0]);
}

#[test]
fn family_documents_round_trip() {
    let families = [
        gaussian_family(0.7, None).unwrap(),
        gaussian_family(1.5, Some((-1, vec![-0.5, 0.25, 1.75]))).unwrap(),
        ProbabilityFamily::Gamma,
    ];
    for fam in families {
        let doc = FamilyDocument::from_family(&fam);
        let back = FamilyDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_family().unwrap(), fam);
    }
}

#[test]
fn family_document_rejects_stray_fields() {
    assert!(FamilyDocument::from_json(r#"{"kind": "gamma", "epsilon": 1}"#)
        .unwrap()
        .to_family()
        .is_err());
    assert!(FamilyDocument::from_json(r#"{"kind": "gaussian"}"#)
        .unwrap()
        .to_family()
        .is_err());
    assert!(FamilyDocument::from_json(r#"{"kind": "gaussian", "eps": 1}"#).is_err());
    assert!(FamilyDocument::from_json(r#"{"kind": "poisson"}"#)
        .unwrap()
        .to_family()
        .is_err());
}

fn alpha_rule() -> impl Strategy<Value = AlphaRule> {
    prop_oneof![Just(AlphaRule::Linear), Just(AlphaRule::Quadratic)]
}

fn operator_kind() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::Angle),
        Just(OperatorKind::Action),
        Just(OperatorKind::Energy),
        Just(OperatorKind::Identity)
    ]
}

proptest! {
    #[test]
    fn epsilon_lists_round_trip(values in prop::collection::vec(1e-6f64..1e6, 1..12)) {
        let text = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_epsilon_list(&text).unwrap(), values);
    }

    #[test]
    fn epsilon_parser_never_panics(text in "[0-9eE.,+ -]{0,24}") {
        let _ = parse_epsilon_list(&text);
    }

    #[test]
    fn run_configs_round_trip(
        eps in 0.01f64..50.0,
        alpha in alpha_rule(),
        op in operator_kind(),
        nmax in 4i64..80,
        sweep in prop::option::of(prop::collection::vec(0.01f64..20.0, 1..6)),
        times in prop::collection::vec(0.0f64..10.0, 1..5),
        perturbation in 0.0f64..1e-3,
        printed in any::<bool>(),
    ) {
        let mut c = RunConfig {
            family: FamilyDocument::from_family(&gaussian_family(eps, None).unwrap()),
            alpha,
            operator: op,
            epsilon_list: sweep,
            times,
            varpi_perturbation: perturbation,
            bound_form: if printed { BoundForm::Printed } else { BoundForm::Coherent },
            ..RunConfig::default()
        };
        c.window.nmax = nmax;
        c.validate().unwrap();
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_json(), c.to_json());
    }
}
