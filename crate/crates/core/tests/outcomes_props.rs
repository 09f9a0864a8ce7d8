use bellharness::outcomes::{
    delta, enumerate_quadruples, equality_count, product_identity_holds, select_actual, Outcome, Quadruple,
    SettingLabel,
};
use proptest::prelude::*;

fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![Just(Outcome::Plus), Just(Outcome::Minus)]
}

fn label() -> impl Strategy<Value = SettingLabel> {
    prop_oneof![Just(SettingLabel::One), Just(SettingLabel::Two)]
}

fn quadruple() -> impl Strategy<Value = Quadruple> {
    (outcome(), outcome(), outcome(), outcome()).prop_map(|(a, b, c, d)| Quadruple::new(a, b, c, d))
}

// Independent restatement over raw integers.
fn raw_delta(v: [i8; 4]) -> i8 {
    let [x1, x2, y1, y2] = v;
    let eq = |p: i8, q: i8| i8::from(p == q);
    eq(x1, y2) - eq(x1, y1) - eq(x2, y1) - eq(x2, y2)
}

proptest! {
    #[test]
    fn equality_count_is_even(q in quadruple()) {
        let n = equality_count(&q);
        prop_assert!(n == 0 || n == 2 || n == 4);
    }

    #[test]
    fn delta_is_zero_or_minus_two(q in quadruple()) {
        let d = delta(&q);
        prop_assert!(d == 0 || d == -2);
        prop_assert_eq!(d, raw_delta(q.values()));
    }

    #[test]
    fn product_identity(q in quadruple()) {
        prop_assert!(product_identity_holds(&q));
        let [x1, x2, y1, y2] = q.values();
        prop_assert_eq!(x1 * y2, (x1 * y1) * (x2 * y1) * (x2 * y2));
    }

    #[test]
    fn selection_is_local(q in quadruple(), a in label(), a2 in label(), b in label(), b2 in label()) {
        prop_assert_eq!(select_actual(&q, a, b).0, select_actual(&q, a, b2).0);
        prop_assert_eq!(select_actual(&q, a, b).1, select_actual(&q, a2, b).1);
    }

    #[test]
    fn negation_preserves_equalities(q in quadruple()) {
        prop_assert_eq!(equality_count(&q), equality_count(&q.negated()));
        prop_assert_eq!(delta(&q), delta(&q.negated()));
    }
}

#[test]
fn brute_force_enumeration() {
    let all = enumerate_quadruples();
    assert_eq!(all.len(), 16);
    let mut hist = [0usize; 5];
    let mut deltas = std::collections::BTreeSet::new();
    for x1 in [1i8, -1] {
        for x2 in [1i8, -1] {
            for y1 in [1i8, -1] {
                for y2 in [1i8, -1] {
                    let v = [x1, x2, y1, y2];
                    let q = Quadruple::from_values(v.map(i64::from)).unwrap();
                    assert!(all.contains(&q));
                    hist[equality_count(&q) as usize] += 1;
                    deltas.insert(raw_delta(v));
                }
            }
        }
    }
    assert_eq!(hist, [2, 0, 12, 0, 2]);
    assert_eq!(deltas.into_iter().collect::<Vec<_>>(), vec![-2, 0]);
}
