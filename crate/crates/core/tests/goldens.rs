//! Golden values for the defining polynomials, the Jacobian and the
//! determinant of the ice-cream basis.

use heron::poly::{det_zero_test, poly_det, vars_from, Monomial, MultiPoly, Vars, ZeroTest};
use heron::simplex::{cayley_menger_poly, heron_system, jacobian, parametrize, FaceKey, HeronModel};
use heron::{QPoly, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Parses sums like `16x123-2x12x13+x12^2` or `1/8x12-1/8x23` over `vars`.
fn parse(vars: &Vars, s: &str) -> QPoly {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut terms = Vec::new();
    let mut rest = s.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'-' => (-1, &rest[1..]),
            b'+' => (1, &rest[1..]),
            _ => (1, rest),
        };
        let end = body[1..].find(['+', '-']).map(|i| i + 1).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        let split = term.find('x').unwrap_or(term.len());
        let coeff: Rational = match &term[..split] {
            "" => Rational::one(),
            c => c.parse().expect("coefficient"),
        };
        let mut exps = vec![0u8; vars.len()];
        for factor in term[split..].split('x').filter(|f| !f.is_empty()) {
            let (name, e) = factor.split_once('^').unwrap_or((factor, "1"));
            let i = vars.iter().position(|v| v == &format!("x{name}")).expect("known variable");
            exps[i] += e.parse::<u8>().expect("exponent");
        }
        terms.push((Monomial::from_exponents(&exps), coeff * Rational::from_integer(BigInt::from(sign))));
    }
    MultiPoly::from_terms(vars.clone(), terms)
}

fn face(s: &str) -> FaceKey {
    s.parse().expect("face")
}

const F123: &str = "16x123-2x12x13-2x12x23-2x13x23+x12^2+x13^2+x23^2";
const F124: &str = "16x124-2x12x14-2x12x24-2x14x24+x12^2+x14^2+x24^2";
const F134: &str = "16x134-2x13x14-2x13x34-2x14x34+x13^2+x14^2+x34^2";
const F234: &str = "16x234-2x23x24-2x23x34-2x24x34+x23^2+x24^2+x34^2";
const F1234: &str = "288x1234+2x12x13x23-2x12x14x23-2x13x14x23+2x14^2x23+2x14x23^2\
    -2x12x13x24+2x13^2x24+2x12x14x24-2x13x14x24-2x13x23x24\
    -2x14x23x24+2x13x24^2+2x12^2x34-2x12x13x34-2x12x14x34\
    +2x13x14x34-2x12x23x34-2x14x23x34-2x12x24x34-2x13x24x34\
    +2x23x24x34+2x12x34^2";

#[test]
fn triangle_defining_polynomial() {
    let sys = heron_system(2).unwrap();
    assert_eq!(sys.len(), 1);
    assert_eq!(sys[0], parse(sys[0].vars(), F123));
}

#[test]
fn tetrahedron_defining_polynomials() {
    let sys = heron_system(3).unwrap();
    let vars = sys[0].vars().clone();
    let expected: Vec<QPoly> = [F123, F124, F134, F234, F1234].iter().map(|s| parse(&vars, s)).collect();
    assert_eq!(sys, expected);
}

#[test]
fn pentachoron_system_size() {
    assert_eq!(heron_system(4).unwrap().len(), 16);
}

#[test]
fn triangle_squared_area() {
    let model = HeronModel::get(2).unwrap();
    let p = cayley_menger_poly(2, face("123")).unwrap();
    let expected = parse(model.edge_vars(), "1/8x12x13+1/8x12x23+1/8x13x23-1/16x12^2-1/16x13^2-1/16x23^2");
    assert_eq!(p, expected);
    let one = Rational::one();
    let x = parametrize(2, &[one.clone(), one.clone(), one]).unwrap();
    assert_eq!(x[3], "3/16".parse::<Rational>().unwrap());
}

#[test]
fn triangle_jacobian_columns() {
    let j = jacobian(2).unwrap();
    let vars = j.vars().clone();
    assert_eq!(&*vars, &["x12", "x13", "x23"].map(String::from));
    let row: Vec<QPoly> = (0..3).map(|c| j.get(3, c).clone()).collect();
    let expected = ["-1/8x12+1/8x13+1/8x23", "1/8x12-1/8x13+1/8x23", "1/8x12+1/8x13-1/8x23"];
    for (got, want) in row.iter().zip(expected) {
        assert_eq!(got, &parse(&vars, want));
    }
    for r in 0..3 {
        for c in 0..3 {
            let want = if r == c { QPoly::one(vars.clone()) } else { QPoly::zero(vars.clone()) };
            assert_eq!(j.get(r, c), &want);
        }
    }
}

#[test]
fn ice_cream_determinant_factors() {
    let model = HeronModel::get(3).unwrap();
    let g = model.ground();
    let rows: Vec<usize> =
        ["12", "13", "14", "123", "124", "134"].iter().map(|s| g.try_index(face(s)).unwrap()).collect();
    let m = model.jacobian_submatrix(&rows);
    let det = poly_det(&m).unwrap();
    let vars = m.vars().clone();
    let factors = ["x13+x14-x34", "x12+x14-x24", "x12+x13-x23"];
    let product =
        factors.iter().fold(QPoly::constant(vars.clone(), "1/512".parse().unwrap()), |acc, f| &acc * &parse(&vars, f));
    // Rows ordered as listed give the positive sign.
    assert_eq!(det, product);
    match det_zero_test(&m).unwrap() {
        ZeroTest::NonZero { value, .. } => assert!(!value.is_zero()),
        ZeroTest::Zero => panic!("ice-cream minor is nonzero"),
    }
}

#[test]
fn nonbasis_determinant_vanishes() {
    let model = HeronModel::get(3).unwrap();
    let g = model.ground();
    let rows: Vec<usize> =
        ["12", "13", "14", "23", "24", "123"].iter().map(|s| g.try_index(face(s)).unwrap()).collect();
    let m = model.jacobian_submatrix(&rows);
    assert!(poly_det(&m).unwrap().is_zero());
    assert!(matches!(det_zero_test(&m).unwrap(), ZeroTest::Zero));
}

#[test]
fn variable_order_is_stable() {
    let v = HeronModel::get(3).unwrap().ground().all_vars();
    let names: Vec<&str> = v.iter().map(String::as_str).collect();
    assert_eq!(names, ["x12", "x13", "x14", "x23", "x24", "x34", "x123", "x124", "x134", "x234", "x1234"]);
    assert_eq!(vars_from(names.iter().copied()), v);
}
