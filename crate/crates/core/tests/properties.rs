use std::collections::BTreeSet;

use pdmu_core::engine::{model_check, Options};
use pdmu_core::mucalc::parse_closed;
use pdmu_core::oracle::random::{random_formula, random_system, FormulaParams, SystemParams};
use pdmu_core::oracle::saturation::{complement, poststar, prestar};
use pdmu_core::pds::{parse_pds, Configuration, HeadSet, PushdownSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const P1: &str = include_str!("../../../corpus/p1.pds");

/// Everything reachable from `start` without exceeding stack depth `bound`.
fn bounded_forward(sys: &PushdownSystem, start: impl IntoIterator<Item = Configuration>, bound: usize) -> BTreeSet<Configuration> {
    let mut seen: BTreeSet<Configuration> = start.into_iter().collect();
    let mut work: Vec<Configuration> = seen.iter().cloned().collect();
    while let Some(c) = work.pop() {
        for s in sys.step(&c) {
            if s.depth() <= bound && seen.insert(s.clone()) {
                work.push(s);
            }
        }
    }
    seen
}

#[test]
fn saturation_contains_bounded_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..40 {
        let sys = random_system(&mut rng, &SystemParams::default());
        let x: &HeadSet = sys.prop("x").unwrap();
        let sources = sys.configurations(3).into_iter().filter(|c| x.contains_config(c));
        let post = poststar(&sys, x);
        for c in bounded_forward(&sys, sources, 6) {
            if c.depth() <= 4 {
                assert!(post.accepts(&c), "{}\n{sys}", sys.format_config(&c));
            }
        }
        let pre = prestar(&sys, x);
        for c in sys.configurations(3) {
            let reach = bounded_forward(&sys, [c.clone()], 6);
            if reach.iter().any(|d| x.contains_config(d)) {
                assert!(pre.accepts(&c), "{}\n{sys}", sys.format_config(&c));
            }
        }
    }
}

#[test]
fn prestar_and_poststar_are_adjoint() {
    // for single heads h and g: if post*(h) holds a g-headed configuration,
    // pre*(g) holds an h-headed one, and conversely
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..30 {
        let sys = random_system(&mut rng, &SystemParams::default());
        let heads: Vec<_> = sys.heads().collect();
        let configs = sys.configurations(2);
        for &h in heads.iter() {
            let post = poststar(&sys, &HeadSet([h].into_iter().collect()));
            for &g in heads.iter() {
                let pre = prestar(&sys, &HeadSet([g].into_iter().collect()));
                // some h-headed config reaches some g-headed config
                let fwd = configs.iter().any(|c| c.head() == g && post.accepts(c));
                let bwd = configs.iter().any(|c| c.head() == h && pre.accepts(c));
                if fwd {
                    // a witness exists; pre* must contain the start of some such run
                    assert!(
                        sys.configurations(4).iter().any(|c| c.head() == h && pre.accepts(c)),
                        "{sys}"
                    );
                }
                if bwd {
                    assert!(sys.configurations(4).iter().any(|c| c.head() == g && post.accepts(c)), "{sys}");
                }
            }
        }
    }
}

#[test]
fn rewrite_only_membership_depends_on_head_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let params = SystemParams {
        rewrite_only: true,
        ..SystemParams::default()
    };
    for _ in 0..60 {
        let sys = random_system(&mut rng, &params);
        let phi = random_formula(&mut rng, &FormulaParams::default());
        let d = model_check(&sys, &phi, &Options::default()).unwrap();
        let mut by_head = std::collections::BTreeMap::new();
        for c in sys.configurations(4) {
            let m = d.accepts(&c).unwrap();
            assert_eq!(*by_head.entry(c.head()).or_insert(m), m, "{phi} at {}", sys.format_config(&c));
        }
    }
}

#[test]
fn invariant_example_on_p1() {
    let sys = parse_pds(P1).unwrap();
    let d = model_check(&sys, &parse_closed("nu Z. x /\\ ~[]Z").unwrap(), &Options::default()).unwrap();
    let bad = poststar(&sys, &complement(&sys, sys.prop("x").unwrap()));
    for c in sys.configurations(3) {
        assert_eq!(d.accepts(&c).unwrap(), !bad.accepts(&c), "{}", sys.format_config(&c));
    }
}

#[test]
fn every_corpus_system_parses_and_round_trips() {
    let dir = std::path::Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus"));
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "pds") {
            let sys = parse_pds(&std::fs::read_to_string(&path).unwrap()).unwrap();
            assert_eq!(parse_pds(&sys.to_string()).unwrap(), sys, "{}", path.display());
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn json_round_trip_preserves_membership() {
    let sys = parse_pds(P1).unwrap();
    let d = model_check(&sys, &parse_closed("nu Z. mu Y. (x /\\ <>Z) \\/ ~<>Y").unwrap(), &Options::default()).unwrap();
    let back = pdmu_core::ama::Denotation::from_json(&d.to_json()).unwrap();
    assert_eq!(back.to_json(), d.to_json());
    for c in sys.configurations(3) {
        assert_eq!(back.accepts(&c).unwrap(), d.accepts(&c).unwrap());
    }
}
