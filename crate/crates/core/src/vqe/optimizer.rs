//! Derivative-free minimizers.
//!
//! [`cobyla`] is Powell's linear-approximation trust-region scheme restricted
//! to the unconstrained case: a simplex of `n + 1` points defines a linear
//! model, the trial step goes to the trust-region boundary along the model's
//! descent direction, and the radius `rho` halves whenever the model stops
//! paying off. [`nelder_mead`] is the classic simplex method.
//!
//! Both stop after `max_evaluations` objective calls at the latest.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CobylaOptions {
    pub rho_begin: f64,
    pub rho_end: f64,
    pub max_evaluations: usize,
}

impl Default for CobylaOptions {
    fn default() -> Self {
        CobylaOptions {
            rho_begin: 1.0,
            rho_end: 1e-4,
            max_evaluations: 300,
        }
    }
}

// Simplex acceptability and step constants from Powell's COBYLA.
const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

struct Counter<F> {
    f: F,
    evaluations: usize,
    limit: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn call(&mut self, x: &DVector<f64>) -> Option<f64> {
        if self.evaluations >= self.limit {
            return None;
        }
        self.evaluations += 1;
        Some((self.f)(x.as_slice()))
    }
}

pub fn cobyla<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: CobylaOptions) -> OptimizeOutcome {
    let n = x0.len();
    let mut fun = Counter {
        f,
        evaluations: 0,
        limit: opts.max_evaluations.max(1),
    };
    let mut pole = DVector::from_column_slice(x0);
    let Some(mut f_pole) = fun.call(&pole) else {
        unreachable!("limit >= 1")
    };
    if n == 0 {
        return OptimizeOutcome {
            x: vec![],
            fx: f_pole,
            evaluations: fun.evaluations,
        };
    }

    let mut rho = opts.rho_begin;
    // column j: vertex j minus the pole
    let mut sim = DMatrix::<f64>::zeros(n, n);
    let mut fvals = DVector::<f64>::zeros(n);
    for j in 0..n {
        let mut x = pole.clone();
        x[j] += rho;
        let Some(fx) = fun.call(&x) else {
            return finish(pole, f_pole, fun.evaluations);
        };
        if fx < f_pole {
            // the new point becomes the pole; the old pole sits at -rho e_j
            sim.column_mut(j)[j] = -rho;
            fvals[j] = f_pole;
            pole = x;
            f_pole = fx;
        } else {
            sim.column_mut(j)[j] = rho;
            fvals[j] = fx;
        }
    }

    let mut geometry_allowed = true;
    loop {
        // keep the best vertex as the pole
        if let Some(j) = (0..n)
            .filter(|&j| fvals[j] < f_pole)
            .min_by(|&a, &b| fvals[a].total_cmp(&fvals[b]))
        {
            let shift = sim.column(j).into_owned();
            pole += &shift;
            std::mem::swap(&mut fvals[j], &mut f_pole);
            for k in 0..n {
                if k == j {
                    sim.set_column(j, &(-&shift));
                } else {
                    let c = sim.column(k) - &shift;
                    sim.set_column(k, &c);
                }
            }
        }
        let Some(simi) = sim.clone().try_inverse() else {
            break;
        };

        // sigma: distance of vertex j from the opposite face; eta: edge length
        let vsig: Vec<f64> = (0..n).map(|j| 1.0 / simi.row(j).norm()).collect();
        let veta: Vec<f64> = (0..n).map(|j| sim.column(j).norm()).collect();
        let acceptable = vsig.iter().all(|&s| s >= ALPHA * rho) && veta.iter().all(|&e| e <= BETA * rho);

        let grad = simi.transpose() * (&fvals - DVector::from_element(n, f_pole));

        if !acceptable && geometry_allowed {
            // replace the worst-shaped vertex
            let jdrop = match (0..n)
                .filter(|&j| veta[j] > BETA * rho)
                .max_by(|&a, &b| veta[a].total_cmp(&veta[b]))
            {
                Some(j) => j,
                None => (0..n)
                    .min_by(|&a, &b| vsig[a].total_cmp(&vsig[b]))
                    .expect("n >= 1"),
            };
            let mut dx = simi.row(jdrop).transpose() * (GAMMA * rho * vsig[jdrop]);
            if grad.dot(&dx) > 0.0 {
                dx = -dx;
            }
            let Some(fx) = fun.call(&(&pole + &dx)) else { break };
            sim.set_column(jdrop, &dx);
            fvals[jdrop] = fx;
            geometry_allowed = false;
            continue;
        }

        let gnorm = grad.norm();
        let mut reduce = gnorm == 0.0;
        if !reduce {
            let dx = &grad * (-rho / gnorm);
            let predicted = rho * gnorm;
            let Some(fx) = fun.call(&(&pole + &dx)) else { break };
            let actual = f_pole - fx;
            geometry_allowed = false;

            // choose the vertex to drop (Powell's rule)
            let mut best = if actual <= 0.0 { 1.0 } else { 0.0 };
            let mut jdrop = None;
            let mut sigbar = vec![0.0; n];
            for j in 0..n {
                let t = simi.row(j).transpose().dot(&dx).abs();
                if t > best {
                    jdrop = Some(j);
                    best = t;
                }
                sigbar[j] = t * vsig[j];
            }
            let mut edgmax = DELTA * rho;
            let mut far = None;
            for j in 0..n {
                if sigbar[j] >= ALPHA * rho || sigbar[j] >= vsig[j] {
                    let t = if actual > 0.0 {
                        (&dx - sim.column(j)).norm()
                    } else {
                        veta[j]
                    };
                    if t > edgmax {
                        far = Some(j);
                        edgmax = t;
                    }
                }
            }
            if far.is_some() {
                jdrop = far;
            }
            match jdrop {
                Some(j) => {
                    sim.set_column(j, &dx);
                    fvals[j] = fx;
                    if actual > 0.0 && actual >= 0.1 * predicted {
                        continue;
                    }
                    reduce = true;
                }
                None => reduce = true,
            }
        }

        if reduce {
            if !acceptable {
                geometry_allowed = true;
                continue;
            }
            if rho <= opts.rho_end {
                break;
            }
            rho *= 0.5;
            if rho <= 1.5 * opts.rho_end {
                rho = opts.rho_end;
            }
        }
    }

    // best point seen among the simplex vertices
    let j = (0..n)
        .min_by(|&a, &b| fvals[a].total_cmp(&fvals[b]))
        .expect("n >= 1");
    if fvals[j] < f_pole {
        let x = &pole + sim.column(j);
        return finish(x, fvals[j], fun.evaluations);
    }
    finish(pole, f_pole, fun.evaluations)
}

fn finish(x: DVector<f64>, fx: f64, evaluations: usize) -> OptimizeOutcome {
    OptimizeOutcome {
        x: x.as_slice().to_vec(),
        fx,
        evaluations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub f_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            initial_step: 1.0,
            f_tol: 1e-8,
            max_evaluations: 300,
        }
    }
}

/// Nelder–Mead with standard coefficients (1, 2, 0.5, 0.5).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: NelderMeadOptions) -> OptimizeOutcome {
    let n = x0.len();
    let mut fun = Counter {
        f,
        evaluations: 0,
        limit: opts.max_evaluations.max(1),
    };
    let start = DVector::from_column_slice(x0);
    let f0 = fun.call(&start).expect("limit >= 1");
    let mut simplex: Vec<(DVector<f64>, f64)> = vec![(start.clone(), f0)];
    for j in 0..n {
        let mut x = start.clone();
        x[j] += opts.initial_step;
        match fun.call(&x) {
            Some(fx) => simplex.push((x, fx)),
            None => return best_of(simplex, fun.evaluations),
        }
    }
    if n == 0 {
        return best_of(simplex, fun.evaluations);
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= opts.f_tol {
            break;
        }
        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, (x, _)| acc + x) / n as f64;
        let worst = simplex[n].0.clone();
        let reflected = &centroid + (&centroid - &worst);
        let Some(fr) = fun.call(&reflected) else { break };
        if fr < simplex[0].1 {
            let expanded = &centroid + (&reflected - &centroid) * 2.0;
            let Some(fe) = fun.call(&expanded) else {
                simplex[n] = (reflected, fr);
                break;
            };
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (toward, f_toward) = if fr < simplex[n].1 {
                (reflected.clone(), fr)
            } else {
                (worst.clone(), simplex[n].1)
            };
            let contracted = &centroid + (&toward - &centroid) * 0.5;
            let Some(fc) = fun.call(&contracted) else { break };
            if fc < f_toward {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = &best + (&vertex.0 - &best) * 0.5;
                    match fun.call(&x) {
                        Some(fx) => *vertex = (x, fx),
                        None => return best_of(simplex, fun.evaluations),
                    }
                }
            }
        }
    }
    best_of(simplex, fun.evaluations)
}

fn best_of(simplex: Vec<(DVector<f64>, f64)>, evaluations: usize) -> OptimizeOutcome {
    let (x, fx) = simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex is never empty");
    finish(x, fx, evaluations)
}
