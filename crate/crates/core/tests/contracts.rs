use linag_core::casestudy::{build_contract_c, build_contract_c1, build_contract_c2, build_triple, CaseStudyParams};
use linag_core::contracts::{load_contract, save_contract, CascadeTriple, ContractError, FormatError, LinearContract};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn case_study_contracts_validate_with_expected_shapes() {
    let p = CaseStudyParams::default();
    let shapes = [
        (build_contract_c(&p), 5, 1),
        (build_contract_c1(&p), 5, 5),
        (build_contract_c2(&p), 4, 1),
    ];
    for (c, s_a, s_g) in shapes {
        c.validate().unwrap();
        assert_eq!((c.input_dim, c.output_dim), (2, 2), "{}", c.label);
        assert_eq!(c.num_assumptions(), s_a, "{}", c.label);
        assert_eq!(c.num_guarantees(), s_g, "{}", c.label);
    }
    let t = build_triple(&p);
    assert_eq!((t.input_dim(), t.intermediate_dim(), t.output_dim()), (2, 2, 2));
}

#[test]
fn files_round_trip_bitwise() {
    let mut p = CaseStudyParams::default();
    // Values without short decimal forms.
    p.tau = 0.1 + 0.2 - 0.2;
    p.delta_v = 1.0 / 3.0;
    let dir = tempfile::tempdir().unwrap();
    for c in [build_contract_c(&p), build_contract_c1(&p), build_contract_c2(&p)] {
        let path = dir.path().join(format!("{}.json", c.label));
        save_contract(&c, &path).unwrap();
        let back = load_contract(&path).unwrap();
        assert_eq!(back, c);
        let bits = |m: &DMatrix<f64>| m.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.guar_now), bits(&c.guar_now));
        assert_eq!(
            back.guar_rhs.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            c.guar_rhs.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        // Saving again gives the same bytes.
        let again = dir.path().join("again.json");
        save_contract(&back, &again).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_contract("/definitely/not/here.json").unwrap_err();
    assert!(matches!(err, FormatError::Io { .. }));
    assert!(err.to_string().contains("/definitely/not/here.json"));
}

#[test]
fn missing_and_unknown_fields_are_named() {
    let c = build_contract_c2(&CaseStudyParams::default());
    let mut v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
    v["assume"].as_object_mut().unwrap().remove("A0");
    let err = LinearContract::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("A0"), "{err}");

    let mut v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
    v["extra"] = serde_json::json!(1);
    let err = LinearContract::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("extra"), "{err}");
}

#[test]
fn wrong_rhs_length_is_a_dimension_error() {
    let c = build_contract_c2(&CaseStudyParams::default());
    let mut v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
    v["guarantee"]["g0"] = serde_json::json!([0.0, 1.0]);
    match LinearContract::from_json(&v.to_string()).unwrap_err() {
        FormatError::Invalid(ContractError::Dimension { field, expected, found, .. }) => {
            assert_eq!((field, expected, found), ("guar_rhs", 1, 2));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn cascade_rejects_mismatched_intermediate() {
    let p = CaseStudyParams::default();
    let wide = LinearContract::vacuous("wide", 3, 2);
    let err = CascadeTriple::new(build_contract_c1(&p), wide, build_contract_c(&p)).unwrap_err();
    assert!(matches!(err, ContractError::Cascade(_)));
}

fn arb_contract() -> impl Strategy<Value = LinearContract> {
    (0usize..3, 0usize..3, 0usize..4, 0usize..4).prop_flat_map(|(nd, ny, sa, sg)| {
        let w = nd + ny;
        (
            prop::collection::vec(-10.0f64..10.0, 2 * sa * nd + sa),
            prop::collection::vec(-10.0f64..10.0, 2 * sg * w + sg),
        )
            .prop_map(move |(a, g)| {
                let m = |v: &[f64], r, c| DMatrix::from_row_slice(r, c, v);
                let (a1, rest) = a.split_at(sa * nd);
                let (a0, ar) = rest.split_at(sa * nd);
                let (g1, rest) = g.split_at(sg * w);
                let (g0, gr) = rest.split_at(sg * w);
                LinearContract::new(
                    "random",
                    nd,
                    ny,
                    m(a1, sa, nd),
                    m(a0, sa, nd),
                    nalgebra::DVector::from_column_slice(ar),
                    m(g1, sg, w),
                    m(g0, sg, w),
                    nalgebra::DVector::from_column_slice(gr),
                )
                .unwrap()
            })
    })
}

proptest! {
    #[test]
    fn split_then_concat_is_identity(c in arb_contract()) {
        let (g1, g0) = c.split_guarantees().concat();
        prop_assert_eq!(g1, c.guar_next.clone());
        prop_assert_eq!(g0, c.guar_now.clone());
    }

    #[test]
    fn json_round_trip_is_exact(c in arb_contract()) {
        let back = LinearContract::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}
