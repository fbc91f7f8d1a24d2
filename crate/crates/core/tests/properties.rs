use proptest::prelude::*;
use undominated::election::undominance_check;
use undominated::rounding::dependent_round;
use undominated::{Alpha, Committee, Election};

fn profile() -> impl Strategy<Value = (Election, Vec<usize>, usize)> {
    (1usize..12, 2usize..8, any::<u64>()).prop_flat_map(|(n, m, seed)| {
        let e = Election::impartial_culture(n, m, seed).unwrap();
        (Just(e), proptest::sample::subsequence((0..m).collect::<Vec<_>>(), 1..=m), 1usize..4)
    })
}

proptest! {
    #[test]
    fn report_matches_direct_count((e, members, t) in profile(), p in 1i64..=20) {
        prop_assume!(t <= members.len());
        let alpha = Alpha::new(p, 20).unwrap();
        let c = Committee::new(members.clone());
        let report = undominance_check(&e, &c, t, alpha).unwrap();
        let mut worst = 0u64;
        for a in (0..e.m()).filter(|a| !members.contains(a)) {
            let dissent = (0..e.n())
                .filter(|&v| members.iter().filter(|&&b| e.position(v, b) < e.position(v, a)).count() < t)
                .count() as u64;
            worst = worst.max(dissent);
        }
        prop_assert_eq!(report.max_dissent, worst);
        prop_assert_eq!(report.threshold, (p as u64 * e.n() as u64) / 20);
        prop_assert_eq!(report.pass, worst <= report.threshold);
    }

    #[test]
    fn rounding_keeps_cardinality(y in proptest::collection::vec(0.0f64..=1.0, 1..25), seed in any::<u64>()) {
        let total: f64 = y.iter().sum();
        let r = dependent_round(&y, seed).unwrap();
        let size = r.selected.iter().filter(|&&s| s).count() as f64;
        prop_assert!(size == total.floor() || size == total.ceil() || (size - total).abs() < 1e-9);
        for (s, v) in r.selected.iter().zip(&y) {
            if *v == 0.0 { prop_assert!(!s); }
            if *v == 1.0 { prop_assert!(s); }
        }
    }

    #[test]
    fn elect_text_round_trips(n in 1usize..10, m in 1usize..10, seed in any::<u64>()) {
        let e = Election::impartial_culture(n, m, seed).unwrap();
        prop_assert_eq!(Election::parse(&e.to_elect()).unwrap(), e);
    }
}
