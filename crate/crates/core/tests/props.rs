use proptest::prelude::*;
use std::sync::OnceLock;
use trusskit::explore::{enumerate, Enumerated, Filter};
use trusskit::io::{parse, serialize, Document};
use trusskit::poset::Poset;
use trusskit::strat::{normalize, strat_equal, StratTruss};
use trusskit::truss::Bundle;

fn trusses() -> &'static [Bundle] {
    static T: OnceLock<Vec<Bundle>> = OnceLock::new();
    T.get_or_init(|| {
        let mut v = Vec::new();
        for n in 1..=2 {
            for e in enumerate(n, 6, Filter::Trusses, 100).unwrap() {
                if let Enumerated::Truss(b) = e {
                    v.push(b);
                }
            }
        }
        v
    })
}

fn strats() -> &'static [StratTruss] {
    static S: OnceLock<Vec<StratTruss>> = OnceLock::new();
    S.get_or_init(|| {
        enumerate(2, 5, Filter::Stratified { max_strata: 3 }, 100)
            .unwrap()
            .into_iter()
            .filter_map(|e| match e {
                Enumerated::Strat(s) => Some(s),
                _ => None,
            })
            .collect()
    })
}

fn dag() -> impl Strategy<Value = Poset> {
    (1usize..8).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            Poset::anonymous(n, &edges).unwrap()
        })
    })
}

/// Alternating sum over all chains, by listing subsets.
fn chi_by_subsets(p: &Poset) -> i64 {
    let n = p.len();
    let mut chi = 0;
    for mask in 1u32..(1 << n) {
        let xs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let chain = xs.iter().all(|&a| xs.iter().all(|&b| p.comparable(a, b)));
        if chain {
            chi += if xs.len() % 2 == 1 { 1 } else { -1 };
        }
    }
    chi
}

proptest! {
    #[test]
    fn dual_is_an_involution(i in any::<prop::sample::Index>()) {
        let b = &trusses()[i.index(trusses().len())];
        let d = b.dual();
        prop_assert_eq!(&d.dual(), b);
        prop_assert_eq!(d.is_open(), b.is_closed());
        prop_assert_eq!(d.is_closed(), b.is_open());
    }

    #[test]
    fn strat_dual_is_an_involution(i in any::<prop::sample::Index>()) {
        let s = &strats()[i.index(strats().len())];
        prop_assert!(strat_equal(&s.dual().dual(), s));
    }

    #[test]
    fn normalize_is_idempotent(i in any::<prop::sample::Index>()) {
        let s = &strats()[i.index(strats().len())];
        let (nf, _) = normalize(s);
        let (again, w) = normalize(&nf);
        prop_assert!(w.is_identity());
        prop_assert!(strat_equal(&again, &nf));
        prop_assert!(nf.bundle().top().len() <= s.bundle().top().len());
    }

    #[test]
    fn truss_json_round_trip(i in any::<prop::sample::Index>()) {
        let d = Document::Truss(trusses()[i.index(trusses().len())].clone());
        let text = serialize(&d);
        let back = parse(&text).unwrap();
        prop_assert_eq!(serialize(&back), text);
        prop_assert_eq!(back, d);
    }

    #[test]
    fn opposite_is_an_involution(p in dag()) {
        let op = p.opposite();
        prop_assert_eq!(op.opposite(), p.clone());
        for x in 0..p.len() {
            for y in 0..p.len() {
                prop_assert_eq!(p.le(x, y), op.le(y, x));
            }
        }
    }

    #[test]
    fn euler_characteristic_matches_chain_listing(p in dag()) {
        prop_assert_eq!(p.euler_characteristic(), chi_by_subsets(&p));
        prop_assert_eq!(p.order_complex().euler_characteristic(), chi_by_subsets(&p));
        prop_assert_eq!(p.opposite().euler_characteristic(), p.euler_characteristic());
    }
}
