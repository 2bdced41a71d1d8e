//! Symmetric Gauss rules on the reference triangle (Dunavant).

use crate::mesh::Point3;

/// Barycentric point and weight; weights sum to one.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

const fn qp(a: f64, b: f64, c: f64, weight: f64) -> QuadPoint {
    QuadPoint {
        bary: [a, b, c],
        weight,
    }
}

const ONE: [QuadPoint; 1] = [qp(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0)];

const THREE: [QuadPoint; 3] = [
    qp(2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
    qp(1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
    qp(1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0),
];

const FOUR: [QuadPoint; 4] = [
    qp(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, -27.0 / 48.0),
    qp(0.6, 0.2, 0.2, 25.0 / 48.0),
    qp(0.2, 0.6, 0.2, 25.0 / 48.0),
    qp(0.2, 0.2, 0.6, 25.0 / 48.0),
];

const A1: f64 = 0.059_715_871_789_770;
const B1: f64 = 0.470_142_064_105_115;
const W1: f64 = 0.132_394_152_788_506;
const A2: f64 = 0.797_426_985_353_087;
const B2: f64 = 0.101_286_507_323_456;
const W2: f64 = 0.125_939_180_544_827;

const SEVEN: [QuadPoint; 7] = [
    qp(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225),
    qp(A1, B1, B1, W1),
    qp(B1, A1, B1, W1),
    qp(B1, B1, A1, W1),
    qp(A2, B2, B2, W2),
    qp(B2, A2, B2, W2),
    qp(B2, B2, A2, W2),
];

/// Number of points per triangle; only the rules 1, 3, 4 and 7 exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct QuadratureOrder(usize);

impl QuadratureOrder {
    pub const P1: Self = QuadratureOrder(1);
    pub const P3: Self = QuadratureOrder(3);
    pub const P4: Self = QuadratureOrder(4);
    pub const P7: Self = QuadratureOrder(7);

    pub fn points(self) -> &'static [QuadPoint] {
        match self.0 {
            1 => &ONE,
            3 => &THREE,
            4 => &FOUR,
            _ => &SEVEN,
        }
    }

    pub fn count(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for QuadratureOrder {
    type Error = String;
    fn try_from(n: usize) -> Result<Self, String> {
        match n {
            1 | 3 | 4 | 7 => Ok(QuadratureOrder(n)),
            _ => Err(format!("no {n}-point triangle rule; use 1, 3, 4 or 7")),
        }
    }
}

impl From<QuadratureOrder> for usize {
    fn from(q: QuadratureOrder) -> usize {
        q.0
    }
}

impl Default for QuadratureOrder {
    fn default() -> Self {
        QuadratureOrder::P4
    }
}

/// Physical points and area-scaled weights of `rule` on triangle `corners`.
pub fn map_rule(corners: &[Point3; 3], area: f64, rule: &[QuadPoint]) -> Vec<(Point3, f64)> {
    rule.iter()
        .map(|q| {
            let p = corners[0] * q.bary[0] + corners[1] * q.bary[1] + corners[2] * q.bary[2];
            (p, q.weight * area)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &[QuadPoint], f: impl Fn(f64, f64) -> f64) -> f64 {
        // reference triangle (0,0),(1,0),(0,1), area 1/2
        rule.iter()
            .map(|q| q.weight * 0.5 * f(q.bary[1], q.bary[2]))
            .sum()
    }

    // exact ∫ x^a y^b over the reference triangle = a! b! / (a+b+2)!
    fn monomial(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn rules_integrate_their_degree_exactly() {
        for (order, degree) in [(1, 1), (3, 2), (4, 3), (7, 5)] {
            let rule = QuadratureOrder::try_from(order).unwrap().points();
            let wsum: f64 = rule.iter().map(|q| q.weight).sum();
            assert!((wsum - 1.0).abs() < 1e-14);
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let got = integrate(rule, |x, y| x.powi(a as i32) * y.powi(b as i32));
                    assert!(
                        (got - monomial(a, b)).abs() < 1e-13,
                        "order {order} fails x^{a} y^{b}"
                    );
                }
            }
        }
    }

    #[test]
    fn unsupported_order_rejected() {
        assert!(QuadratureOrder::try_from(5).is_err());
    }
}
