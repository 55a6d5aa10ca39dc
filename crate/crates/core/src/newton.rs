//! Newton-polytope support reduction for the numerator basis.
//!
//! The candidate numerator monomials are exactly those `alpha` with
//! `2*alpha` inside the convex hull of `{beta + gamma1 + gamma2}` over the
//! support of `f` and the denominator term set. Membership is decided
//! exactly: "is the point a convex combination of the generators" is a
//! rational linear-programming feasibility problem, solved by a phase-one
//! simplex with Bland's rule (which cannot cycle).

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::{terms_up_to, Exponent, Polynomial, TermSet};
use crate::Rat;

/// Exact convex-hull membership query: generators are lattice points
/// (exponent vectors), the query point may be any rational vector.
#[derive(Clone, Debug)]
pub struct HullQuery {
    pub generators: Vec<Exponent>,
    pub point: Vec<Rat>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NewtonError {
    #[error("hull query needs at least one generator")]
    NoGenerators,
    #[error("dimension mismatch: generator has length {generator}, point has length {point}")]
    DimensionMismatch { generator: usize, point: usize },
    #[error("restricted basis needs a nonzero polynomial")]
    ZeroPolynomial,
    #[error("restricted basis needs a nonempty term set")]
    EmptyTermSet,
}

/// Decide `point ∈ conv(generators)` exactly.
pub fn hull_membership(q: &HullQuery) -> Result<bool, NewtonError> {
    if q.generators.is_empty() {
        return Err(NewtonError::NoGenerators);
    }
    let dim = q.point.len();
    for g in &q.generators {
        if g.len() != dim {
            return Err(NewtonError::DimensionMismatch {
                generator: g.len(),
                point: dim,
            });
        }
    }
    // Bounding box shortcut: outside the coordinate range of the generators
    // means outside the hull.
    for i in 0..dim {
        let lo = q.generators.iter().map(|g| g.entries()[i]).min().unwrap();
        let hi = q.generators.iter().map(|g| g.entries()[i]).max().unwrap();
        let lo = Rat::from_integer(lo.into());
        let hi = Rat::from_integer(hi.into());
        if q.point[i] < lo || q.point[i] > hi {
            return Ok(false);
        }
    }
    // Degenerate hull (all generators identical): membership is equality,
    // which the bounding box above already decided.
    if q.generators.iter().all(|g| g == &q.generators[0]) {
        return Ok(true);
    }
    // Feasibility of { lambda >= 0, sum lambda = 1, sum lambda_i g_i = point }.
    let ncols = q.generators.len();
    let nrows = dim + 1;
    let mut columns = vec![vec![Rat::zero(); nrows]; ncols];
    for (c, g) in q.generators.iter().enumerate() {
        for i in 0..dim {
            columns[c][i] = Rat::from_integer(g.entries()[i].into());
        }
        columns[c][dim] = Rat::one();
    }
    let mut rhs: Vec<Rat> = q.point.to_vec();
    rhs.push(Rat::one());
    Ok(lp_feasible(&mut columns, &mut rhs))
}

/// Phase-one simplex with Bland's rule on `A x = b, x >= 0` where the columns
/// of `A` are given; returns whether the system is feasible.
fn lp_feasible(columns: &mut [Vec<Rat>], rhs: &mut [Rat]) -> bool {
    let nrows = rhs.len();
    let nstruct = columns.len();
    // Normalize to b >= 0 so the artificial basis is feasible.
    for i in 0..nrows {
        if rhs[i].is_negative() {
            rhs[i] = -rhs[i].clone();
            for col in columns.iter_mut() {
                col[i] = -col[i].clone();
            }
        }
    }
    // Tableau rows: [structural columns | artificial identity | rhs]
    let ncols = nstruct + nrows;
    let mut tab: Vec<Vec<Rat>> = (0..nrows)
        .map(|i| {
            let mut row: Vec<Rat> = (0..nstruct).map(|c| columns[c][i].clone()).collect();
            for j in 0..nrows {
                row.push(if j == i { Rat::one() } else { Rat::zero() });
            }
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (nstruct..ncols).collect();
    let cost = |j: usize| -> Rat {
        if j >= nstruct {
            Rat::one()
        } else {
            Rat::zero()
        }
    };

    loop {
        // Reduced costs; Bland: enter the lowest-index improving column.
        let mut enter = None;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut z = Rat::zero();
            for i in 0..nrows {
                if cost(basis[i]).is_one() {
                    z += &tab[i][j];
                }
            }
            if cost(j) - z < Rat::zero() {
                enter = Some(j);
                break;
            }
        }
        let Some(enter) = enter else { break };
        // Ratio test; Bland: among ties pick the smallest basis variable.
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for i in 0..nrows {
            if tab[i][enter].is_positive() {
                let ratio = &tab[i][ncols] / &tab[i][enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            // Unbounded cannot happen in phase one; treat as infeasible.
            return false;
        };
        let piv = tab[leave][enter].clone();
        for v in tab[leave].iter_mut() {
            *v /= &piv;
        }
        for i in 0..nrows {
            if i != leave && !tab[i][enter].is_zero() {
                let factor = tab[i][enter].clone();
                for j in 0..=ncols {
                    let mut t = tab[leave][j].clone();
                    t *= &factor;
                    tab[i][j] -= &t;
                }
            }
        }
        basis[leave] = enter;
    }

    let mut objective = Rat::zero();
    for i in 0..nrows {
        if cost(basis[i]).is_one() {
            objective += &tab[i][ncols];
        }
    }
    objective.is_zero()
}

/// The restricted numerator candidate set: all `alpha` with `2*alpha` in the
/// convex hull of `{beta + gamma1 + gamma2 : beta in supp(f), gamma_i in T}`.
/// Always a subset of the dense basis of degree `d = e + ceil(deg(f)/2)`.
///
/// The hull is the Minkowski sum `conv(supp f) + 2 conv(T)`, so each
/// membership test runs over `|supp f| + |T|` columns instead of the full
/// `|supp f| * |T|^2` sum set; the answer is identical to testing
/// [`hull_membership`] on the expanded generator list.
pub fn restricted_basis(f: &Polynomial, t: &TermSet) -> Result<TermSet, NewtonError> {
    if f.is_zero() {
        return Err(NewtonError::ZeroPolynomial);
    }
    if t.is_empty() {
        return Err(NewtonError::EmptyTermSet);
    }
    let n = f.n();
    let supp: Vec<&Exponent> = f.iter().map(|(e, _)| e).collect();
    let tset: Vec<&Exponent> = t.iter().collect();
    let e = t.max_degree().unwrap_or(0);
    let deg_f = f.degree() as u32;
    let d = e + deg_f.div_ceil(2);

    // Coordinate and total-degree ranges of the generator set, for cheap
    // exclusion before the LP.
    let coord_range = |i: usize| -> (u32, u32) {
        let (slo, shi) = min_max(supp.iter().map(|b| b.entries()[i]));
        let (tlo, thi) = min_max(tset.iter().map(|g| g.entries()[i]));
        (slo + 2 * tlo, shi + 2 * thi)
    };
    let ranges: Vec<(u32, u32)> = (0..n).map(coord_range).collect();
    let (dlo, dhi) = {
        let (slo, shi) = min_max(supp.iter().map(|b| b.total_degree()));
        let (tlo, thi) = min_max(tset.iter().map(|g| g.total_degree()));
        (slo + 2 * tlo, shi + 2 * thi)
    };

    let mut basis = TermSet::empty(n);
    'candidates: for alpha in terms_up_to(n, d).iter() {
        let doubled = alpha.doubled();
        let deg2 = doubled.total_degree();
        if deg2 < dlo || deg2 > dhi {
            continue;
        }
        for (i, &(lo, hi)) in ranges.iter().enumerate() {
            let v = doubled.entries()[i];
            if v < lo || v > hi {
                continue 'candidates;
            }
        }
        if minkowski_membership(&doubled, &supp, &tset) {
            basis.insert(alpha.clone());
        }
    }
    Ok(basis)
}

fn min_max(vals: impl Iterator<Item = u32>) -> (u32, u32) {
    let mut lo = u32::MAX;
    let mut hi = 0;
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// `point ∈ conv(supp) + 2 conv(T)`: feasibility of
/// `point = sum lambda_b b + 2 sum mu_g g` with both weight vectors
/// nonnegative and summing to one.
fn minkowski_membership(point: &Exponent, supp: &[&Exponent], tset: &[&Exponent]) -> bool {
    let n = point.len();
    let ncols = supp.len() + tset.len();
    let nrows = n + 2;
    let mut columns = vec![vec![Rat::zero(); nrows]; ncols];
    for (c, b) in supp.iter().enumerate() {
        for i in 0..n {
            columns[c][i] = Rat::from_integer(b.entries()[i].into());
        }
        columns[c][n] = Rat::one();
    }
    for (c, g) in tset.iter().enumerate() {
        let col = &mut columns[supp.len() + c];
        for i in 0..n {
            col[i] = Rat::from_integer((2 * g.entries()[i]).into());
        }
        col[n + 1] = Rat::one();
    }
    let mut rhs: Vec<Rat> = point
        .entries()
        .iter()
        .map(|&v| Rat::from_integer(v.into()))
        .collect();
    rhs.push(Rat::one());
    rhs.push(Rat::one());
    lp_feasible(&mut columns, &mut rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{ill_posed, motzkin, parse_polynomial};
    use num_bigint::BigInt;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    fn exps(list: &[&[u32]]) -> Vec<Exponent> {
        list.iter().map(|e| Exponent::new(e.to_vec())).collect()
    }

    #[test]
    fn generator_itself_is_member() {
        let q = HullQuery {
            generators: exps(&[&[1, 2], &[3, 0]]),
            point: vec![rat(1, 1), rat(2, 1)],
        };
        assert!(hull_membership(&q).unwrap());
    }

    #[test]
    fn midpoint_is_member() {
        let q = HullQuery {
            generators: exps(&[&[0, 0], &[2, 4]]),
            point: vec![rat(1, 1), rat(2, 1)],
        };
        assert!(hull_membership(&q).unwrap());
    }

    #[test]
    fn point_above_bounding_box_is_outside() {
        let q = HullQuery {
            generators: exps(&[&[1, 1], &[2, 0], &[0, 3]]),
            point: vec![rat(5, 2), rat(1, 1)],
        };
        assert!(!hull_membership(&q).unwrap());
    }

    #[test]
    fn errors_on_bad_queries() {
        let q = HullQuery {
            generators: vec![],
            point: vec![rat(0, 1)],
        };
        assert_eq!(hull_membership(&q), Err(NewtonError::NoGenerators));
        let q = HullQuery {
            generators: exps(&[&[1, 2, 3]]),
            point: vec![rat(0, 1)],
        };
        assert!(matches!(
            hull_membership(&q),
            Err(NewtonError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn motzkin_restricted_basis_is_the_paper_one() {
        let t = TermSet::from_exponents(2, [Exponent::zeros(2)]).unwrap();
        let basis = restricted_basis(&motzkin(), &t).unwrap();
        let expect =
            TermSet::from_exponents(2, exps(&[&[0, 0], &[1, 1], &[2, 1], &[1, 2]])).unwrap();
        assert_eq!(basis, expect);
    }

    #[test]
    fn ill_posed_restricted_basis_is_x1_x2() {
        let t = TermSet::from_exponents(2, [Exponent::zeros(2)]).unwrap();
        let f = ill_posed(&rat(1, 100_000_000));
        let basis = restricted_basis(&f, &t).unwrap();
        let expect = TermSet::from_exponents(2, exps(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(basis, expect);
    }

    #[test]
    fn constant_one_gives_single_point_hull() {
        let t = TermSet::from_exponents(2, [Exponent::zeros(2)]).unwrap();
        let f = parse_polynomial("1", 2).unwrap();
        let basis = restricted_basis(&f, &t).unwrap();
        let expect = TermSet::from_exponents(2, [Exponent::zeros(2)]).unwrap();
        assert_eq!(basis, expect);
    }

    #[test]
    fn basis_respects_degree_bound() {
        let t = terms_up_to(2, 1);
        let f = motzkin();
        let basis = restricted_basis(&f, &t).unwrap();
        let d = 1 + 3; // e + ceil(deg f / 2)
        assert!(basis.iter().all(|e| e.total_degree() <= d));
    }

    /// Independent oracle: Caratheodory enumeration. The point lies in the
    /// hull iff some subset of at most dim+1 generators admits a nonnegative
    /// affine combination, found by exact Gaussian elimination.
    fn hull_oracle(generators: &[Exponent], point: &[Rat]) -> bool {
        let dim = point.len();
        let k = generators.len();
        let max_subset = dim + 1;
        let mut stack: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        while let Some(subset) = stack.pop() {
            if solves_nonneg(generators, point, &subset) {
                return true;
            }
            if subset.len() < max_subset {
                let last = *subset.last().unwrap();
                for next in last + 1..k {
                    let mut s = subset.clone();
                    s.push(next);
                    stack.push(s);
                }
            }
        }
        false
    }

    fn solves_nonneg(generators: &[Exponent], point: &[Rat], subset: &[usize]) -> bool {
        let dim = point.len();
        let rows = dim + 1;
        let cols = subset.len();
        // [G; 1] lambda = [p; 1], exact Gaussian elimination with partial
        // pivoting on nonzero entries.
        let mut a: Vec<Vec<Rat>> = (0..rows)
            .map(|i| {
                subset
                    .iter()
                    .map(|&c| {
                        if i < dim {
                            Rat::from_integer(generators[c].entries()[i].into())
                        } else {
                            Rat::one()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut b: Vec<Rat> = point.to_vec();
        b.push(Rat::one());

        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            b.swap(r, p);
            let piv = a[r][c].clone();
            for v in a[r].iter_mut() {
                *v /= &piv;
            }
            b[r] /= &piv;
            for i in 0..rows {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for j in 0..cols {
                        let mut t = a[r][j].clone();
                        t *= &f;
                        a[i][j] -= &t;
                    }
                    let mut t = b[r].clone();
                    t *= &f;
                    b[i] -= &t;
                }
            }
            pivot_cols.push(c);
            r += 1;
        }
        // Inconsistent rows?
        for i in r..rows {
            if !b[i].is_zero() {
                return false;
            }
        }
        // Unique solution only when every column is a pivot; otherwise set
        // free variables to zero (the subsets enumeration covers the rest).
        if pivot_cols.len() < cols {
            return false;
        }
        b[..cols].iter().all(|v| !v.is_negative())
    }

    /// The Minkowski-structured LP inside restricted_basis answers exactly
    /// like filtering with the public hull oracle on the expanded sum set.
    #[test]
    fn restricted_basis_agrees_with_direct_hull_filtering() {
        let cases: Vec<(Polynomial, TermSet)> = vec![
            (motzkin(), TermSet::from_exponents(2, [Exponent::zeros(2)]).unwrap()),
            (motzkin(), terms_up_to(2, 1)),
            (ill_posed(&rat(1, 7)), TermSet::from_exponents(2, [Exponent::zeros(2)]).unwrap()),
            (
                parse_polynomial("x1^2*x2^2*x3^2 + x1^4 - x2^2*x3^2", 3).unwrap(),
                terms_up_to(3, 1),
            ),
        ];
        for (f, t) in cases {
            let fast = restricted_basis(&f, &t).unwrap();
            let mut generators = std::collections::BTreeSet::new();
            for (beta, _) in f.iter() {
                for g1 in t.iter() {
                    for g2 in t.iter() {
                        generators.insert(beta.add(g1).add(g2));
                    }
                }
            }
            let generators: Vec<Exponent> = generators.into_iter().collect();
            let e = t.max_degree().unwrap();
            let d = e + (f.degree() as u32).div_ceil(2);
            let mut slow = TermSet::empty(f.n());
            for alpha in terms_up_to(f.n(), d).iter() {
                let point: Vec<Rat> = alpha
                    .doubled()
                    .entries()
                    .iter()
                    .map(|&v| Rat::from_integer(v.into()))
                    .collect();
                let q = HullQuery {
                    generators: generators.clone(),
                    point,
                };
                if hull_membership(&q).unwrap() {
                    slow.insert(alpha.clone());
                }
            }
            assert_eq!(fast, slow, "f = {f}");
        }
    }

    #[test]
    fn membership_agrees_with_elimination_oracle() {
        let mut rng = StdRng::seed_from_u64(20260810);
        let mut checked = 0;
        while checked < 50 {
            let dim = rng.gen_range(1..=3);
            let count = rng.gen_range(1..=6);
            let generators: Vec<Exponent> = (0..count)
                .map(|_| Exponent::new((0..dim).map(|_| rng.gen_range(0..5)).collect()))
                .collect();
            // Half the queries near the hull, half integer points.
            let point: Vec<Rat> = if rng.gen_bool(0.5) {
                let g1 = &generators[rng.gen_range(0..count)];
                let g2 = &generators[rng.gen_range(0..count)];
                g1.entries()
                    .iter()
                    .zip(g2.entries())
                    .map(|(&a, &b)| rat(a as i64 + b as i64, 2))
                    .collect()
            } else {
                (0..dim).map(|_| rat(rng.gen_range(0..6), 1)).collect()
            };
            let q = HullQuery {
                generators: generators.clone(),
                point: point.clone(),
            };
            let got = hull_membership(&q).unwrap();
            let want = hull_oracle(&generators, &point);
            assert_eq!(got, want, "generators={generators:?} point={point:?}");
            checked += 1;
        }
    }
}
