//! Sign tests for comparing two classification systems.
//!
//! The micro sign test looks at all (document, category) decision pairs
//! where the two systems disagree and exactly one is correct; the macro
//! S-test looks at categories whose F1 values differ. Both reduce to an
//! exact one-sided binomial tail under a fair coin — no normal
//! approximation is ever used. The macro variant counts categories, not
//! the size of the improvement, which can look counter-intuitive when a
//! large macro gain comes from very few categories.
//!
//! Note the micro test tracks decision correctness, not F1 directly: it
//! weighs true negatives, which F1 ignores.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Verdict symbol. "Much better" (`<<`) means the first system is better
/// with p < 0.01; `<` means p in [0.01, 0.05); `~` means no significant
/// difference; `>` and `>>` mirror those in the second system's favour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symbol {
    #[serde(rename = "<<")]
    MuchBetter,
    #[serde(rename = "<")]
    Better,
    #[serde(rename = "~")]
    Similar,
    #[serde(rename = ">")]
    Worse,
    #[serde(rename = ">>")]
    MuchWorse,
}

impl Symbol {
    pub fn ascii(&self) -> &'static str {
        match self {
            Symbol::MuchBetter => "<<",
            Symbol::Better => "<",
            Symbol::Similar => "~",
            Symbol::Worse => ">",
            Symbol::MuchWorse => ">>",
        }
    }

    pub fn unicode(&self) -> &'static str {
        match self {
            Symbol::MuchBetter => "\u{226a}",
            Symbol::Better => "<",
            Symbol::Similar => "~",
            Symbol::Worse => ">",
            Symbol::MuchWorse => "\u{226b}",
        }
    }

    /// The verdict with the systems swapped.
    pub fn flipped(&self) -> Symbol {
        match self {
            Symbol::MuchBetter => Symbol::MuchWorse,
            Symbol::Better => Symbol::Worse,
            Symbol::Similar => Symbol::Similar,
            Symbol::Worse => Symbol::Better,
            Symbol::MuchWorse => Symbol::MuchBetter,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ascii())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    STestMicroSign,
    STestMacro,
}

/// Outcome of one sign test between systems A and B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceVerdict {
    pub test: TestKind,
    /// Number of informative disagreements.
    pub n_diff: usize,
    /// How many of them system A won.
    pub k_wins: usize,
    /// One-sided exact binomial tail for the winning side; invariant under
    /// swapping A and B.
    pub p_value: f64,
    pub symbol: Symbol,
}

/// Exact `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
///
/// Small `n` uses integer binomial sums (exact dyadic rationals); large `n`
/// switches to log-space summation.
pub fn binomial_tail(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    if n <= 62 {
        // C(n, i) sums fit u128 comfortably up to n = 62
        let mut coeff: u128 = 1;
        for i in 0..k {
            coeff = coeff * (n - i) as u128 / (i + 1) as u128;
        }
        let mut sum: u128 = 0;
        let mut c = coeff;
        for i in k..=n {
            sum += c;
            if i < n {
                c = c * (n - i) as u128 / (i + 1) as u128;
            }
        }
        sum as f64 / 2f64.powi(n as i32)
    } else {
        // log-sum-exp over ln C(n, i) - n ln 2
        let ln2 = std::f64::consts::LN_2;
        let mut ln_c = 0.0f64;
        for i in 0..k {
            ln_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        let mut terms = Vec::with_capacity(n - k + 1);
        let mut cur = ln_c;
        for i in k..=n {
            terms.push(cur - n as f64 * ln2);
            if i < n {
                cur += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
            }
        }
        let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
        (max + sum.ln()).exp().min(1.0)
    }
}

fn verdict(test: TestKind, n_diff: usize, k_wins: usize) -> SignificanceVerdict {
    if n_diff == 0 {
        return SignificanceVerdict {
            test,
            n_diff: 0,
            k_wins: 0,
            p_value: 1.0,
            symbol: Symbol::Similar,
        };
    }
    let b_wins = n_diff - k_wins;
    let p_value = binomial_tail(n_diff, k_wins.max(b_wins));
    let symbol = if k_wins == b_wins || p_value >= 0.05 {
        Symbol::Similar
    } else if k_wins > b_wins {
        if p_value < 0.01 {
            Symbol::MuchBetter
        } else {
            Symbol::Better
        }
    } else if p_value < 0.01 {
        Symbol::MuchWorse
    } else {
        Symbol::Worse
    };
    SignificanceVerdict { test, n_diff, k_wins, p_value, symbol }
}

/// Micro sign s-test over all (document, category) decisions.
///
/// Restricted to pairs where A and B decide differently and exactly one of
/// them is correct (for binary decisions, disagreement already implies
/// that). `k_wins` counts A's correct decisions among them.
pub fn micro_sign_test(
    pred_a: &[BTreeSet<usize>],
    pred_b: &[BTreeSet<usize>],
    truth: &[BTreeSet<usize>],
    p: usize,
) -> Result<SignificanceVerdict> {
    if pred_a.len() != truth.len() || pred_b.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "decision arrays not aligned: A={}, B={}, truth={}",
            pred_a.len(),
            pred_b.len(),
            truth.len()
        )));
    }
    let mut n_diff = 0usize;
    let mut k_wins = 0usize;
    for ((a, b), t) in pred_a.iter().zip(pred_b).zip(truth) {
        for j in 0..p {
            let da = a.contains(&j);
            let db = b.contains(&j);
            let dt = t.contains(&j);
            if da != db && ((da == dt) != (db == dt)) {
                n_diff += 1;
                if da == dt {
                    k_wins += 1;
                }
            }
        }
    }
    Ok(verdict(TestKind::STestMicroSign, n_diff, k_wins))
}

/// Macro S-test: sign test over the categories whose F1 values differ.
pub fn macro_s_test(per_cat_f1_a: &[f64], per_cat_f1_b: &[f64]) -> Result<SignificanceVerdict> {
    if per_cat_f1_a.len() != per_cat_f1_b.len() {
        return Err(Error::DimensionMismatch(format!(
            "F1 vectors not aligned: {} vs {}",
            per_cat_f1_a.len(),
            per_cat_f1_b.len()
        )));
    }
    let mut n_diff = 0usize;
    let mut k_wins = 0usize;
    for (&fa, &fb) in per_cat_f1_a.iter().zip(per_cat_f1_b) {
        if fa != fb {
            n_diff += 1;
            if fa > fb {
                k_wins += 1;
            }
        }
    }
    Ok(verdict(TestKind::STestMacro, n_diff, k_wins))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct-summation oracle via Pascal's triangle in f64.
    fn tail_oracle(n: usize, k: usize) -> f64 {
        let mut row = vec![1.0f64];
        for _ in 0..n {
            let mut next = vec![1.0];
            for w in row.windows(2) {
                next.push(w[0] + w[1]);
            }
            next.push(1.0);
            row = next;
        }
        row.iter().skip(k).sum::<f64>() / 2f64.powi(n as i32)
    }

    #[test]
    fn tail_matches_direct_summation_for_all_small_n() {
        for n in 0..=30 {
            for k in 0..=n + 1 {
                let got = binomial_tail(n, k);
                let want = tail_oracle(n, k);
                assert!(
                    (got - want).abs() <= 1e-12 * want.max(1.0),
                    "n={n} k={k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn worked_tail_values_are_exact() {
        assert_eq!(binomial_tail(10, 9), 11.0 / 1024.0);
        assert_eq!(binomial_tail(5, 5), 1.0 / 32.0);
        assert_eq!(binomial_tail(8, 8), 1.0 / 256.0);
        assert_eq!(binomial_tail(7, 7), 1.0 / 128.0);
        assert_eq!(binomial_tail(4, 0), 1.0);
        assert_eq!(binomial_tail(4, 5), 0.0);
    }

    #[test]
    fn large_n_path_stays_accurate() {
        // n = 100 still has an exactly computable oracle in f64
        for k in [0, 1, 40, 50, 60, 99, 100] {
            let got = binomial_tail(100, k);
            let want = tail_oracle(100, k);
            assert!((got - want).abs() <= 1e-10 * want.max(1e-30), "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn verdict_thresholds() {
        // n=10, k=9 -> p = 11/1024 ~ 0.0107 -> '<'
        let v = verdict(TestKind::STestMicroSign, 10, 9);
        assert_eq!(v.symbol, Symbol::Better);
        assert!((v.p_value - 11.0 / 1024.0).abs() < 1e-15);
        // n=8, k=8 -> p = 1/256 < 0.01 -> '<<'
        assert_eq!(verdict(TestKind::STestMicroSign, 8, 8).symbol, Symbol::MuchBetter);
        // 5 of 5 -> p = 1/32 -> '<'
        let v = verdict(TestKind::STestMacro, 5, 5);
        assert_eq!(v.symbol, Symbol::Better);
        assert_eq!(v.p_value, 1.0 / 32.0);
        // 7 of 7 -> 1/128 -> '<<'
        assert_eq!(verdict(TestKind::STestMacro, 7, 7).symbol, Symbol::MuchBetter);
        // losing side mirrors
        assert_eq!(verdict(TestKind::STestMacro, 8, 0).symbol, Symbol::MuchWorse);
        assert_eq!(verdict(TestKind::STestMacro, 10, 1).symbol, Symbol::Worse);
        // balanced or weak evidence -> '~'
        assert_eq!(verdict(TestKind::STestMacro, 6, 3).symbol, Symbol::Similar);
        assert_eq!(verdict(TestKind::STestMacro, 4, 4).symbol, Symbol::Similar);
        assert_eq!(verdict(TestKind::STestMacro, 0, 0).symbol, Symbol::Similar);
    }

    fn sets(rows: &[&[usize]]) -> Vec<BTreeSet<usize>> {
        rows.iter().map(|r| r.iter().copied().collect()).collect()
    }

    #[test]
    fn identical_systems_are_similar() {
        let truth = sets(&[&[0], &[1], &[0, 1]]);
        let pred = sets(&[&[0], &[0], &[1]]);
        let v = micro_sign_test(&pred, &pred, &truth, 2).unwrap();
        assert_eq!(v.n_diff, 0);
        assert_eq!(v.symbol, Symbol::Similar);
        assert_eq!(v.p_value, 1.0);
    }

    #[test]
    fn micro_sign_counts_only_informative_disagreements() {
        // 1 doc, 2 cats: A correct on both, B wrong on both
        let truth = sets(&[&[0]]);
        let a = sets(&[&[0]]);
        let b = sets(&[&[1]]);
        let v = micro_sign_test(&a, &b, &truth, 2).unwrap();
        assert_eq!((v.n_diff, v.k_wins), (2, 2));
    }

    #[test]
    fn swapping_systems_mirrors_symbol_and_preserves_p() {
        let truth = sets(&[&[0], &[0], &[0], &[0], &[0], &[0], &[0], &[0]]);
        let a = truth.clone();
        let b = sets(&[&[], &[], &[], &[], &[], &[], &[], &[]]);
        let v_ab = micro_sign_test(&a, &b, &truth, 1).unwrap();
        let v_ba = micro_sign_test(&b, &a, &truth, 1).unwrap();
        assert_eq!(v_ab.symbol, Symbol::MuchBetter);
        assert_eq!(v_ba.symbol, v_ab.symbol.flipped());
        assert_eq!(v_ab.p_value, v_ba.p_value);
        assert_eq!(v_ab.n_diff, v_ba.n_diff);
    }

    #[test]
    fn macro_test_ignores_equal_categories() {
        let a = [0.5, 0.6, 0.7, 0.2, 0.9];
        let b = [0.5, 0.5, 0.6, 0.1, 0.8];
        let v = macro_s_test(&a, &b).unwrap();
        assert_eq!((v.n_diff, v.k_wins), (4, 4));
        let same = macro_s_test(&a, &a).unwrap();
        assert_eq!(same.symbol, Symbol::Similar);
    }

    #[test]
    fn symbol_serialization_uses_ascii_aliases() {
        let json = serde_json::to_string(&Symbol::MuchBetter).unwrap();
        assert_eq!(json, "\"<<\"");
        let back: Symbol = serde_json::from_str("\">>\"").unwrap();
        assert_eq!(back, Symbol::MuchWorse);
        assert_eq!(Symbol::MuchBetter.unicode(), "≪");
    }
}
