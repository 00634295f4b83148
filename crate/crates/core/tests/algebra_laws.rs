use homred_core::algebra::*;
use homred_core::grading::{compose, koszul_sign, signature, Multidegree};
use homred_core::rational::{q, Q};
use homred_core::sampling;
use proptest::prelude::*;

fn sgn(odd: bool) -> Q {
    if odd {
        q(-1)
    } else {
        q(1)
    }
}

fn odd(d: i64) -> bool {
    d.rem_euclid(2) == 1
}

type Bracket = fn(&GradedElement, &GradedElement, &Poisson) -> homred_core::Result<GradedElement>;

fn check_laws(br: Bracket, table: &std::sync::Arc<GeneratorTable>, pi: &Poisson, degrees: &[i64], seed: u64, n: usize) {
    let mut rng = sampling::rng(seed);
    for _ in 0..n {
        let pick = |r: &mut sampling::SeededRng| degrees[rand_index(r, degrees.len())];
        let (da, db, dc) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let a = sampling::homogeneous(&mut rng, table, da, 3, 3);
        let b = sampling::homogeneous(&mut rng, table, db, 3, 3);
        let c = sampling::homogeneous(&mut rng, table, dc, 3, 3);
        let ab = br(&a, &b, pi).unwrap();
        let ba = br(&b, &a, pi).unwrap();
        let anti = &ab + &ba.scale(&sgn(odd(da) && odd(db)));
        assert!(anti.is_zero(), "antisymmetry: {a} | {b}");
        let lhs = br(&a, &(&b * &c), pi).unwrap();
        let rhs = &(&ab * &c) + &(&b * &br(&a, &c, pi).unwrap()).scale(&sgn(odd(da) && odd(db)));
        assert_eq!(lhs, rhs, "Leibniz");
        let j1 = br(&a, &br(&b, &c, pi).unwrap(), pi).unwrap();
        let j2 = br(&ab, &c, pi).unwrap();
        let j3 = br(&b, &br(&a, &c, pi).unwrap(), pi).unwrap().scale(&sgn(odd(da) && odd(db)));
        assert_eq!(j1, &j2 + &j3, "Jacobi");
    }
}

fn rand_index(r: &mut sampling::SeededRng, n: usize) -> usize {
    use rand::Rng;
    r.gen_range(0..n)
}

#[test]
fn super_poisson_laws() {
    let t = GeneratorTable::brst(4, 2);
    check_laws(super_poisson, &t, &Poisson::canonical(2), &[-2, -1, 0, 1, 2], 11, 60);
}

#[test]
fn rothstein_laws_mixed_levels() {
    let t = GeneratorTable::levels(4, &[2, 1], true);
    check_laws(rothstein_flat, &t, &Poisson::canonical(2), &[-3, -2, -1, 0, 1, 2, 3], 12, 60);
}

#[test]
fn rothstein_on_level_one_is_half_ghost_part() {
    let t = GeneratorTable::brst(2, 2);
    let pi = Poisson::canonical(1);
    let mut rng = sampling::rng(5);
    for _ in 0..40 {
        let a = sampling::mixed(&mut rng, &t, &[-1, 0, 1], 2, 3);
        let b = sampling::mixed(&mut rng, &t, &[-1, 0, 1], 2, 3);
        let s = super_poisson(&a, &b, &pi).unwrap();
        let r = rothstein_flat(&a, &b, &pi).unwrap();
        let base = pi.base_bracket(&a, &b);
        assert_eq!(&s - &base, (&r - &base).scale(&q(2)));
    }
}

#[test]
fn star_associative_and_semiclassical() {
    let t = GeneratorTable::brst(4, 2);
    let pi = Poisson::canonical(2);
    let mut rng = sampling::rng(21);
    for _ in 0..8 {
        let a = sampling::mixed(&mut rng, &t, &[-1, 0, 1], 3, 3);
        let b = sampling::mixed(&mut rng, &t, &[-1, 0, 1], 3, 3);
        let c = sampling::mixed(&mut rng, &t, &[-1, 0, 1], 3, 3);
        let n = 4;
        let l = star(&star(&a, &b, &pi, n).unwrap(), &c, &pi, n).unwrap();
        let r = star(&a, &star(&b, &c, &pi, n).unwrap(), &pi, n).unwrap();
        assert_eq!(l, r);
        let comm = star_commutator(&a, &b, &pi, 1).unwrap();
        assert!(comm.nu_part(0).is_zero());
        assert_eq!(comm.nu_part(1), super_poisson(&a, &b, &pi).unwrap());
    }
}

#[test]
fn strong_invariance_for_quadratic() {
    let t = GeneratorTable::base(4);
    let pi = Poisson::canonical(2);
    let mut rng = sampling::rng(3);
    for _ in 0..10 {
        let j = sampling::homogeneous(&mut rng, &t, 0, 2, 4).filter(|m| m.base_degree(&t) == 2);
        let f = sampling::polynomial(&mut rng, &t, 4, 5);
        let c = &star(&j, &f, &pi, 5).unwrap() - &star(&f, &j, &pi, 5).unwrap();
        assert_eq!(c, super_poisson(&j, &f, &pi).unwrap().shift_nu(1));
    }
}

fn bch_checks(lie: &Lie) {
    let t = GeneratorTable::base(3);
    let nu = GradedElement::nu(&t);
    let mut rng = sampling::rng(8);
    let pi = Poisson::linear(lie);
    for x in 0..3 {
        for y in 0..3 {
            let ex = GradedElement::base_var(&t, x);
            let ey = GradedElement::base_var(&t, y);
            let c = &bch_star(&ex, &ey, lie, 4).unwrap() - &bch_star(&ey, &ex, lie, 4).unwrap();
            let mut br = GradedElement::zero(&t);
            for z in 0..3 {
                br.add_scaled(&lie.c(x, y, z), &GradedElement::base_var(&t, z));
            }
            assert_eq!(c, &br * &nu);
        }
        for _ in 0..5 {
            let f = sampling::polynomial(&mut rng, &t, 3, 4);
            let ex = GradedElement::base_var(&t, x);
            let c = &bch_star(&ex, &f, lie, 5).unwrap() - &bch_star(&f, &ex, lie, 5).unwrap();
            assert_eq!(c, &pi.base_bracket(&ex, &f) * &nu);
        }
    }
}

#[test]
fn bch_so3_and_heisenberg() {
    bch_checks(&Lie::so3());
    bch_checks(&Lie::heisenberg());
}

#[test]
fn bch_associative_low_order() {
    let lie = Lie::so3();
    let t = GeneratorTable::base(3);
    let mut rng = sampling::rng(99);
    for _ in 0..4 {
        let a = sampling::polynomial(&mut rng, &t, 2, 3);
        let b = sampling::polynomial(&mut rng, &t, 2, 3);
        let c = sampling::polynomial(&mut rng, &t, 2, 3);
        let l = bch_star(&bch_star(&a, &b, &lie, 4).unwrap(), &c, &lie, 4).unwrap();
        let r = bch_star(&a, &bch_star(&b, &c, &lie, 4).unwrap(), &lie, 4).unwrap();
        assert_eq!(l, r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn koszul_sign_composition(seed in any::<u64>(), n in 0usize..8) {
        let mut rng = sampling::rng(seed);
        let x = Multidegree((0..n).map(|_| rand_index(&mut rng, 7) as i64 - 3).collect());
        let s = sampling::permutation(&mut rng, n);
        let t = sampling::permutation(&mut rng, n);
        let lhs = koszul_sign(&compose(&s, &t), &x).unwrap();
        let rhs = koszul_sign(&s, &x.permuted(&t).unwrap()).unwrap() * koszul_sign(&t, &x).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(koszul_sign(&s, &Multidegree(vec![2; n])).unwrap(), 1);
        prop_assert_eq!(koszul_sign(&s, &Multidegree(vec![1; n])).unwrap(), signature(&s));
    }
}
