use ccs_playground::acceptance::{oracle, random_processes};
use ccs_playground::ccs::parse_ccs;
use ccs_playground::fairtest::{bot_s_ccs, Verdict};
use ccs_playground::lts::{weak_bisim_bounded, BisimOptions, CcsLts, Explorer};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        for (ctx, p) in random_processes(seed, 4, 8, 3) {
            let text = format!("[{}] {p}", ctx.0);
            let back = parse_ccs(&text).unwrap();
            prop_assert_eq!(back.context, ctx);
            prop_assert_eq!(back.process, p);
        }
    }

    #[test]
    fn success_predicate_matches_the_thread_oracle(seed in any::<u64>()) {
        for (ctx, p) in random_processes(seed, 4, 8, 3) {
            let (v, _) = bot_s_ccs(ctx, &p, 500);
            if let (true, Some(b)) = (!matches!(v, Verdict::Inconclusive { .. }), oracle::must_reach_success(ctx.0, &p, 500)) {
                prop_assert_eq!(v.is_pass(), b, "{}", p);
            }
        }
    }

    #[test]
    fn strong_bisimilarity_implies_weak(seed in any::<u64>()) {
        let ps = random_processes(seed, 6, 6, 1);
        for (c1, p) in &ps {
            for (c2, q) in &ps {
                if c1 != c2 {
                    continue;
                }
                let check = |strong| {
                    let mut l = Explorer::new(CcsLts { ctx: *c1 }, 500);
                    let mut r = Explorer::new(CcsLts { ctx: *c2 }, 500);
                    weak_bisim_bounded(&mut l, p, &mut r, q, BisimOptions { strong, depth: 3, ..BisimOptions::default() })
                };
                if check(true).is_bisimilar() {
                    prop_assert!(check(false).is_bisimilar(), "{} {}", p, q);
                }
            }
        }
    }
}
