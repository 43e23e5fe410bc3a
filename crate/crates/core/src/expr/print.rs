use num_traits::{One, Signed};

use super::{Monomial, PhaseSpace, Polynomial, Rational, RationalExpr};

/// `a` or `a/b`, with the sign kept.
pub fn print_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn print_monomial(m: &Monomial, ps: &PhaseSpace) -> String {
    m.support()
        .map(|(slot, e)| {
            let name = ps.name(ps.var_at(slot).expect("slot belongs to the phase space"));
            if e == 1 {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Terms in descending graded lexicographic order, e.g. `x1^2 - 2*x1*p1 + 1/2`.
pub fn print_polynomial(p: &Polynomial, ps: &PhaseSpace) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let magnitude = c.abs();
        match (i, c.is_negative()) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        if m.is_one() {
            out.push_str(&print_rational(&magnitude));
        } else if magnitude.is_one() {
            out.push_str(&print_monomial(m, ps));
        } else {
            out.push_str(&print_rational(&magnitude));
            out.push('*');
            out.push_str(&print_monomial(m, ps));
        }
    }
    out
}

/// Canonical text of an expression; parsing it back yields the same stored form.
pub fn print_expression(e: &RationalExpr, ps: &PhaseSpace) -> String {
    let num = print_polynomial(e.numerator(), ps);
    if e.is_polynomial() {
        return num;
    }
    let den = e.denominator();
    let num = if e.numerator().num_terms() > 1 {
        format!("({num})")
    } else {
        num
    };
    // A single power with unit coefficient can stand without parentheses.
    let bare_den = den.num_terms() == 1
        && den
            .leading_term()
            .is_some_and(|(m, c)| c.is_one() && m.support().count() == 1);
    let den = print_polynomial(den, ps);
    if bare_den {
        format!("{num}/{den}")
    } else {
        format!("{num}/({den})")
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expression;
    use super::*;

    fn roundtrip(s: &str) -> String {
        let ps = PhaseSpace::with_parameters(3, ["r"]).unwrap();
        print_expression(&parse_expression(s, &ps).unwrap(), &ps)
    }

    #[test]
    fn zero() {
        assert_eq!(roundtrip("x1 - x1"), "0");
    }

    #[test]
    fn declaration_order() {
        assert_eq!(roundtrip("p1*x1"), "x1*p1");
        assert_eq!(roundtrip("r^2 - x3^2 - x2^2"), "-x2^2 - x3^2 + r^2");
    }

    #[test]
    fn no_gcd_cancellation() {
        assert_eq!(roundtrip("(x1^2-1)/(x1-1)"), "(x1^2 - 1)/(x1 - 1)");
    }

    #[test]
    fn denominators() {
        assert_eq!(roundtrip("x1/p1^2"), "x1/p1^2");
        assert_eq!(roundtrip("-x1/p1^2"), "-x1/p1^2");
        assert_eq!(roundtrip("x1/(x2*p2)"), "x1/(x2*p2)");
        assert_eq!(roundtrip("(x1+p1)/(1-x1)"), "(-x1 - p1)/(x1 - 1)");
        assert_eq!(roundtrip("x1/(2*p1)"), "1/2*x1/p1");
    }

    #[test]
    fn rational_coefficients() {
        assert_eq!(roundtrip("x1/2 - 3/4"), "1/2*x1 - 3/4");
        assert_eq!(roundtrip("-7/3"), "-7/3");
    }
}
