use exmass_core::extrinsic::InducedMetric;
use exmass_core::mass::adm_flux;
use exmass_core::models::{
    ae_immersion_check, zoo, zoo_entry, BumpGraph, Codim2Graph, ConeGraph, FlatInclusion, SchwarzschildGraph,
};
use exmass_core::{make_model, Error, ImmersionModel, ModelSpec, SphereQuadrature};

const RADII: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

#[test]
fn every_zoo_entry_builds_and_keys_are_unique() {
    let entries = zoo();
    for e in &entries {
        let m = make_model(&e.spec).unwrap_or_else(|err| panic!("{}: {err}", e.key));
        assert_eq!(m.dim(), e.spec.dim());
        assert_eq!(m.kind(), e.spec.kind());
    }
    let mut keys: Vec<_> = entries.iter().map(|e| e.key).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), entries.len());
    assert!(matches!(zoo_entry("no-such-model"), Err(Error::Spec(_))));
}

#[test]
fn specs_round_trip_through_json() {
    for e in zoo() {
        let text = serde_json::to_string(&e.spec).unwrap();
        let back: ModelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e.spec);
    }
    let bad = r#"{"model":"flat","n":3,"bogus":1}"#;
    assert!(serde_json::from_str::<ModelSpec>(bad).is_err());
}

#[test]
fn invalid_parameters_are_spec_errors() {
    for spec in [
        ModelSpec::Flat { n: 2, tau: 1.0 },
        ModelSpec::SpherePatch { n: 4, r: -1.0 },
        ModelSpec::FlatInclusion { n: 5, d: 4 },
        ModelSpec::SchwarzschildGraph { n: 5, m: 1.0 },
    ] {
        assert!(matches!(make_model(&spec), Err(Error::Spec(_))), "{spec:?}");
    }
}

#[test]
fn flat_inclusion_induces_the_euclidean_metric() {
    let model = FlatInclusion { n: 4, d: 6 };
    let x = [0.3, -1.2, 4.0, 0.7];
    let s = model.induced_sample(&x);
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(s.g(i, j), if i == j { 1.0 } else { 0.0 });
        }
    }
    assert!(s.dg.iter().chain(&s.ddg).all(|v| *v == 0.0));
    let rep = ae_immersion_check(&model, 1.0, &RADII);
    assert!(rep.pass);
    assert!(rep.values.iter().filter(|(k, _)| k.starts_with("(ii) position")).all(|(_, v)| *v == 0.0), "{:?}", rep.values);
}

#[test]
fn decaying_graphs_are_ae_and_the_cone_is_not() {
    let codim2 = Codim2Graph { n: 5, c1: 1.0, sigma1: 1.5, c2: 0.5, sigma2: 2.0 };
    let rep = ae_immersion_check(&codim2, codim2.decay_order(), &RADII);
    assert!(rep.pass, "{:?}", rep.notes);
    let graph = SchwarzschildGraph { n: 3, m: 1.0 };
    assert!(ae_immersion_check(&graph, 1.0, &[20.0, 40.0, 80.0, 160.0]).pass);
    let cone = ConeGraph { n: 3, slope: 0.1, tau: 1.0 };
    let rep = ae_immersion_check(&cone, 1.0, &RADII);
    assert!(!rep.pass);
    assert!(rep.notes.iter().any(|n| n.contains("(ii)")), "{:?}", rep.notes);
}

#[test]
fn schwarzschild_graph_induces_isotropic_schwarzschild_flux() {
    // The graph's induced metric is Schwarzschild in area-radius form, so the
    // ADM flux tends to m while the coordinate values differ from the isotropic chart.
    let graph = SchwarzschildGraph { n: 3, m: 1.0 };
    let induced = InducedMetric(&graph);
    let quad = SphereQuadrature::new(3, 8).unwrap();
    let far = adm_flux(&induced, 1e4, &quad).unwrap();
    assert!((far - 1.0).abs() < 1e-3, "{far}");
    assert!(graph.horizon() > 0.0 && graph.rho_min() >= graph.horizon());
}

#[test]
fn bump_is_flat_beyond_its_support() {
    let bump = BumpGraph { n: 3, amplitude: 0.8, support: 3.0 };
    let quad = SphereQuadrature::new(3, 6).unwrap();
    assert_eq!(adm_flux(&InducedMetric(&bump), 3.5, &quad).unwrap(), 0.0);
    let inside = bump.position(&[1.0, 0.0, 0.0]);
    assert!(inside[3] > 0.0);
}
