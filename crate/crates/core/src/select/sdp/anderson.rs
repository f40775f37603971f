//! Type-II Anderson acceleration for a fixed-point map `w -> T(w)`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

pub(crate) struct Anderson {
    memory: usize,
    /// Differences of consecutive residuals `f = T(w) - w`.
    df: VecDeque<Vec<f64>>,
    /// Differences of consecutive map values `T(w)`.
    dt: VecDeque<Vec<f64>>,
    /// `gram[(i, j)] = <df_i, df_j>` for the stored differences.
    gram: DMatrix<f64>,
    prev_f: Option<Vec<f64>>,
    prev_t: Option<Vec<f64>>,
}

impl Anderson {
    pub(crate) fn new(memory: usize) -> Self {
        Self {
            memory,
            df: VecDeque::with_capacity(memory),
            dt: VecDeque::with_capacity(memory),
            gram: DMatrix::zeros(0, 0),
            prev_f: None,
            prev_t: None,
        }
    }

    pub(crate) fn reset(&mut self) {
        self.df.clear();
        self.dt.clear();
        self.gram = DMatrix::zeros(0, 0);
        self.prev_f = None;
        self.prev_t = None;
    }

    /// Next iterate from the current point `w` and its image `t = T(w)`.
    /// Returns `t` unchanged until at least one difference pair is stored.
    pub(crate) fn step(&mut self, w: &[f64], t: Vec<f64>) -> Vec<f64> {
        let f: Vec<f64> = t.iter().zip(w).map(|(a, b)| a - b).collect();
        if let (Some(pf), Some(pt)) = (self.prev_f.take(), self.prev_t.take()) {
            if self.df.len() == self.memory {
                self.df.pop_front();
                self.dt.pop_front();
                self.gram = self.gram.clone().remove_row(0).remove_column(0);
            }
            let new_df: Vec<f64> = f.iter().zip(&pf).map(|(a, b)| a - b).collect();
            let m = self.df.len();
            let mut gram = self.gram.clone().insert_row(m, 0.0).insert_column(m, 0.0);
            for (i, d) in self.df.iter().enumerate() {
                let v = dot(d, &new_df);
                gram[(i, m)] = v;
                gram[(m, i)] = v;
            }
            gram[(m, m)] = dot(&new_df, &new_df);
            self.gram = gram;
            self.df.push_back(new_df);
            self.dt
                .push_back(t.iter().zip(&pt).map(|(a, b)| a - b).collect());
        }
        self.prev_f = Some(f.clone());
        self.prev_t = Some(t.clone());
        let m = self.df.len();
        if m == 0 {
            return t;
        }

        // gamma = argmin ||f - dF gamma||, via regularised normal equations
        let mut gram = self.gram.clone();
        let rhs = DVector::from_iterator(m, self.df.iter().map(|d| dot(d, &f)));
        let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
        for i in 0..m {
            gram[(i, i)] += 1e-10 * scale;
        }
        let Some(gamma) = gram.cholesky().map(|c| c.solve(&rhs)) else {
            self.reset();
            return t;
        };
        if gamma.iter().any(|g| !g.is_finite()) {
            self.reset();
            return t;
        }
        let mut next = t;
        for (g, d) in gamma.iter().zip(&self.dt) {
            for (x, dx) in next.iter_mut().zip(d) {
                *x -= g * dx;
            }
        }
        next
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
