use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite metric space on points `0..n`, as an explicit distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetric<S: Scalar> {
    dist: Vec<Vec<S>>,
}

impl<S: Scalar> FiniteMetric<S> {
    /// Checks symmetry, zero diagonal, non-negativity and the triangle
    /// inequality.
    pub fn new(dist: Vec<Vec<S>>) -> Result<Self> {
        let n = dist.len();
        if dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMetric("distance table is not square".into()));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::InvalidMetric(format!("d({i},{i}) is not zero")));
            }
            for j in 0..n {
                if dist[i][j] < S::zero() {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) is negative")));
                }
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidMetric(format!(
                        "d({i},{j}) differs from d({j},{i})"
                    )));
                }
                if i != j && dist[i][j].is_zero() {
                    return Err(Error::InvalidMetric(format!(
                        "distinct points {i} and {j} at distance 0"
                    )));
                }
                for k in 0..n {
                    if dist[i][k].clone() > dist[i][j].clone() + dist[j][k].clone() {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for {i}, {j}, {k}"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetric { dist })
    }

    /// Parses a whitespace-separated square table, one row per line; `#`
    /// starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(S::parse_scalar)
                    .collect::<Result<Vec<S>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// `d(x, y) = 1` for distinct points.
    pub fn discrete(n: usize) -> Self {
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { S::zero() } else { S::one() })
                    .collect()
            })
            .collect();
        FiniteMetric { dist }
    }

    /// Points on a line with the absolute-difference metric.
    pub fn line(points: &[S]) -> Result<Self> {
        Self::new(
            points
                .iter()
                .map(|a| {
                    points
                        .iter()
                        .map(|b| (a.clone() - b.clone()).abs())
                        .collect()
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn d(&self, i: usize, j: usize) -> &S {
        &self.dist[i][j]
    }

    pub fn max_distance(&self) -> S {
        self.dist
            .iter()
            .flatten()
            .fold(S::zero(), |acc, x| if *x > acc { x.clone() } else { acc })
    }

    /// `[i][j]` is `d(i, j) < eps`.
    pub fn closeness(&self, eps: &S) -> Vec<Vec<bool>> {
        self.dist
            .iter()
            .map(|row| row.iter().map(|x| x < eps).collect())
            .collect()
    }
}

impl<S: Scalar> fmt::Display for FiniteMetric<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.dist {
            let cells: Vec<String> = row.iter().map(Scalar::render).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}
