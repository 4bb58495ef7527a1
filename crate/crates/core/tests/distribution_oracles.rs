//! The hand-written distribution tails checked against statrs and against
//! closed forms.

use seedlex_core::stats::{
    anova_oneway, chi_square_upper_tail, f_upper_tail, ln_gamma, regularized_beta, t_two_sided,
};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};

fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol.max(want.abs() * 1e-9)
}

#[test]
fn ln_gamma_agrees_with_statrs() {
    for i in 1..400 {
        let x = i as f64 * 0.37;
        let want = statrs::function::gamma::ln_gamma(x);
        assert!(close(ln_gamma(x), want, 1e-11), "x={x}: {} vs {want}", ln_gamma(x));
    }
}

#[test]
fn incomplete_beta_agrees_with_statrs() {
    for &a in &[0.5, 1.0, 2.5, 7.0, 40.0, 300.0] {
        for &b in &[0.5, 1.0, 3.0, 12.0, 250.0] {
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let want = statrs::function::beta::beta_reg(a, b, x);
                let got = regularized_beta(a, b, x);
                assert!(close(got, want, 1e-10), "I_{x}({a},{b}) = {got}, statrs {want}");
            }
        }
    }
}

#[test]
fn f_tail_agrees_with_statrs() {
    for &(d1, d2) in &[(1.0, 2.0), (2.0, 5.0), (3.0, 10.0), (5.0, 20.0), (23.0, 591_520.0), (10.0, 1.0)] {
        let dist = FisherSnedecor::new(d1, d2).unwrap();
        for &f in &[0.01, 0.5, 1.0, 2.0, 4.5, 17.2, 60.0] {
            let want = dist.sf(f);
            let got = f_upper_tail(f, d1, d2);
            assert!(close(got, want, 1e-10), "F({d1},{d2}) tail at {f}: {got} vs {want}");
        }
    }
}

#[test]
fn t_and_chi_square_tails_agree_with_statrs() {
    for &df in &[1.0, 2.0, 2.94, 9.5, 30.0, 1000.0] {
        let dist = StudentsT::new(0.0, 1.0, df).unwrap();
        for &t in &[0.1, 0.8, 1.96, 3.0, 7.5] {
            let want = 2.0 * dist.sf(t);
            assert!(close(t_two_sided(t, df), want, 1e-10), "t={t}, df={df}");
            assert!(close(t_two_sided(-t, df), want, 1e-10));
        }
    }
    for &df in &[1.0, 2.0, 5.0, 23.0] {
        let dist = ChiSquared::new(df).unwrap();
        for &x in &[0.05, 1.0, 3.84, 10.0, 40.0] {
            assert!(close(chi_square_upper_tail(x, df), dist.sf(x), 1e-10), "chi2={x}, df={df}");
        }
    }
}

// Exact critical values: (1,2) has tail 1 - sqrt(f/(f+2)) and (2,v) has tail
// (1 + 2f/v)^(-v/2).
#[test]
fn f_table_critical_values() {
    let f_1_2 = |alpha: f64| 2.0 * (1.0 - alpha).powi(2) / (1.0 - (1.0 - alpha).powi(2));
    let f_2_v = |alpha: f64, v: f64| v / 2.0 * (alpha.powf(-2.0 / v) - 1.0);

    assert!((f_1_2(0.05) - 18.512_820_512_820_5).abs() < 1e-9);
    assert!((f_2_v(0.05, 2.0) - 19.0).abs() < 1e-12);
    assert!((f_2_v(0.01, 2.0) - 99.0).abs() < 1e-12);

    for &alpha in &[0.1, 0.05, 0.025, 0.01, 0.001] {
        assert!((f_upper_tail(f_1_2(alpha), 1.0, 2.0) - alpha).abs() < 1e-10);
        for &v in &[2.0, 3.0, 10.0, 60.0] {
            assert!((f_upper_tail(f_2_v(alpha, v), 2.0, v) - alpha).abs() < 1e-10, "alpha={alpha}, v={v}");
        }
    }
}

#[test]
fn anova_p_matches_statrs() {
    let groups = vec![vec![1.0, 2.0, 4.0], vec![3.0, 5.0, 6.5, 4.0], vec![0.5, 1.5]];
    let a = anova_oneway(&groups).unwrap();
    let want = FisherSnedecor::new(a.df_between as f64, a.df_within as f64).unwrap().sf(a.f);
    assert!(close(a.p_value, want, 1e-12));
}
