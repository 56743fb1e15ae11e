use proptest::prelude::*;

use cpcf_core::analysis::cf::{join_memory, join_value, AbstractMemory, AbstractValue};
use cpcf_core::analysis::cp::{st_closure, CopySet};
use cpcf_core::lang::Literal;

const VARS: [&str; 5] = ["a", "b", "c", "d", "e"];

fn value() -> impl Strategy<Value = AbstractValue> {
    prop_oneof![
        (-2i64..3).prop_map(|k| AbstractValue::Const(Literal::Int(k))),
        any::<bool>().prop_map(|b| AbstractValue::Const(Literal::Bool(b))),
        Just(AbstractValue::Const(Literal::Str("s".into()))),
        Just(AbstractValue::Top),
        Just(AbstractValue::Err),
    ]
}

fn memory() -> impl Strategy<Value = AbstractMemory> {
    proptest::collection::btree_map(proptest::sample::select(&VARS[..]), value(), 0..5)
        .prop_map(|m| m.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn copy_set() -> impl Strategy<Value = CopySet> {
    let var = || proptest::sample::select(&VARS[..]);
    proptest::collection::vec((var(), var()), 0..6).prop_map(st_closure)
}

proptest! {
    #[test]
    fn value_join_is_a_least_upper_bound(a in value(), b in value(), c in value()) {
        let j = join_value(&a, &b);
        prop_assert_eq!(&j, &join_value(&b, &a));
        prop_assert_eq!(join_value(&a, &a), a.clone());
        prop_assert_eq!(join_value(&join_value(&a, &b), &c), join_value(&a, &join_value(&b, &c)));
        prop_assert!(a.le(&j) && b.le(&j));
        if a.le(&c) && b.le(&c) {
            prop_assert!(j.le(&c));
        }
    }

    #[test]
    fn memory_join_is_a_least_upper_bound(a in memory(), b in memory(), c in memory()) {
        let j = join_memory(&a, &b);
        prop_assert_eq!(&j, &join_memory(&b, &a));
        prop_assert_eq!(join_memory(&a, &a), a.clone());
        prop_assert_eq!(join_memory(&join_memory(&a, &b), &c), join_memory(&a, &join_memory(&b, &c)));
        prop_assert!(a.le(&j) && b.le(&j));
        if a.le(&c) && b.le(&c) {
            prop_assert!(j.le(&c));
        }
        prop_assert!(AbstractMemory::new().le(&a));
    }

    #[test]
    fn copy_sets_meet_and_stay_closed(a in copy_set(), b in copy_set(), c in copy_set()) {
        let m = a.intersect(&b);
        prop_assert_eq!(&m, &b.intersect(&a));
        prop_assert_eq!(a.intersect(&a), a.clone());
        prop_assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
        prop_assert!(m.is_subset(&a) && m.is_subset(&b));
        prop_assert_eq!(st_closure(m.pairs()), m.clone());
        for (x, y) in a.pairs() {
            prop_assert!(x != y);
            prop_assert!(a.contains(y, x));
        }
    }

    #[test]
    fn closure_is_transitive(a in copy_set()) {
        let both: Vec<(&str, &str)> = a.pairs().flat_map(|(x, y)| [(x, y), (y, x)]).collect();
        for &(x, y) in &both {
            for &(y2, z) in &both {
                if y == y2 && x != z {
                    prop_assert!(a.contains(x, z), "{x}={y}, {y}={z}");
                }
            }
        }
    }

    #[test]
    fn removing_a_variable_drops_exactly_its_pairs(a in copy_set(), v in proptest::sample::select(&VARS[..])) {
        let r = a.remove_var(v);
        prop_assert!(r.is_subset(&a));
        for (x, y) in a.pairs() {
            prop_assert_eq!(r.contains(x, y), x != v && y != v);
        }
    }
}
