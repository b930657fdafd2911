use pccc::bounds::{check_ns_improves, ns_threshold, parse_rate, union_bound};
use pccc::wef::{
    constituent_cwef, cwef_to_iowef, d_free_eff, exhaustive_cwef_oracle, free_effective_distance,
    uniform_interleaver_combine,
};
use pccc::{build_trellis, parse_generator_spec, EnumeratorKind, Trellis, WeightEnumerator};

fn trellis(text: &str) -> Trellis {
    build_trellis(parse_generator_spec(text).unwrap())
}

#[test]
fn dynamic_programme_matches_brute_force() {
    for code in ["1,5/7", "1,7/5", "1,2/3"] {
        let t = trellis(code);
        for n in 2..=10 {
            let dp = constituent_cwef(&t, n, n, n + t.memory()).unwrap();
            let brute = exhaustive_cwef_oracle(&t, n).unwrap();
            let a: Vec<_> = dp.iter().collect();
            let b: Vec<_> = brute.iter().collect();
            assert_eq!(a, b, "{code} N={n}");
        }
    }
}

#[test]
fn ns_relabelling_keeps_the_table() {
    let t = trellis("1,5/7");
    for n in [8, 1000] {
        let p = uniform_interleaver_combine(&constituent_cwef(&t, n, 6, 60).unwrap(), n).unwrap();
        let s = cwef_to_iowef(&p, true).unwrap();
        let ns = cwef_to_iowef(&p, false).unwrap();
        assert_eq!(s.kind(), EnumeratorKind::PcccIowef);
        assert_eq!(ns.kind(), EnumeratorKind::NsIowef);
        assert_eq!(s.len(), ns.len());
        for (w, d, c) in s.iter() {
            assert_eq!(&ns.get(w, d - w), c);
        }
    }
}

#[test]
fn free_effective_distances() {
    assert_eq!(free_effective_distance(&trellis("1,2/3"), true, 40).unwrap(), 4);
    assert_eq!(free_effective_distance(&trellis("1,5/7"), true, 40).unwrap(), 10);
    assert_eq!(free_effective_distance(&trellis("1,5/7"), false, 40).unwrap(), 8);
    assert_eq!(free_effective_distance(&trellis("1,7/5"), true, 40).unwrap(), 8);
    let t = trellis("1,2/3");
    let p = uniform_interleaver_combine(&constituent_cwef(&t, 200, 2, 40).unwrap(), 200).unwrap();
    assert!(d_free_eff(&p, true).unwrap() >= 4);
}

#[test]
fn improvement_condition_verdicts() {
    let (child, parent) = (parse_rate("1/2").unwrap(), parse_rate("1/3").unwrap());
    assert_eq!(ns_threshold(child, parent).unwrap(), pccc::bounds::Rate::from_integer(6));
    let verdict = |code: &str| check_ns_improves(free_effective_distance(&trellis(code), true, 40).unwrap(), child, parent).unwrap();
    assert!(!verdict("1,2/3"));
    assert!(verdict("1,5/7"));
    assert!(verdict("1,7/5"));
    assert!(ns_threshold(child, child).is_err());
}

#[test]
fn enumerator_text_survives_a_round_trip() {
    let t = trellis("1,7/5");
    let p = uniform_interleaver_combine(&constituent_cwef(&t, 50, 4, 20).unwrap(), 50).unwrap();
    let io = cwef_to_iowef(&p, true).unwrap();
    let back = WeightEnumerator::from_text(&io.to_text()).unwrap();
    assert_eq!(back.iter().collect::<Vec<_>>(), io.iter().collect::<Vec<_>>());
    assert_eq!(back.kind(), io.kind());
    let grid = [0.0, 2.0, 4.0];
    assert_eq!(union_bound(&back, 1.0 / 3.0, &grid).unwrap().total, union_bound(&io, 1.0 / 3.0, &grid).unwrap().total);
}

#[test]
fn malformed_enumerator_text_is_rejected() {
    assert!(WeightEnumerator::from_text("").is_err());
    assert!(WeightEnumerator::from_text("10 2 5 pccc-iowef\n2 x 1\n").is_err());
    assert!(WeightEnumerator::from_text("10 2 5 pccc-iowef\n3 4 1\n").is_err());
    assert!(WeightEnumerator::from_text("10 2 5 nonsense\n").is_err());
}
