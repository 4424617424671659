//! Derivative-free simplex maximization with a projection onto the feasible
//! set applied to every trial point.

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub max_iterations: usize,
    /// Stop once best and worst vertex values differ by less than this.
    pub value_tolerance: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
}

struct Vertex {
    x: Vec<f64>,
    value: f64,
}

/// Maximizes `objective` starting from `start` with an initial simplex of
/// edge `scale` along each axis. `objective` returns `None` for points where
/// it is undefined; those rank below every defined value.
pub(crate) fn maximize<F, P>(objective: F, project: P, start: &[f64], scale: f64, settings: Settings) -> Outcome
where
    F: Fn(&[f64]) -> Option<f64>,
    P: Fn(&mut [f64]),
{
    let n = start.len();
    let eval = |x: &[f64]| objective(x).filter(|v| v.is_finite()).unwrap_or(f64::NEG_INFINITY);
    let make = |mut x: Vec<f64>| {
        project(&mut x);
        let value = eval(&x);
        Vertex { x, value }
    };

    let origin = make(start.to_vec());
    let mut simplex = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut x = origin.x.clone();
        x[i] += scale;
        project(&mut x);
        if x == origin.x {
            x = origin.x.clone();
            x[i] -= scale;
        }
        simplex.push(make(x));
    }
    simplex.push(origin);

    let mut iterations = 0;
    loop {
        // best first; stable so ties keep their previous order
        simplex.sort_by(|a, b| b.value.total_cmp(&a.value));
        let spread = simplex[0].value - simplex[n].value;
        if spread.is_finite() && spread < settings.value_tolerance {
            break;
        }
        if iterations >= settings.max_iterations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(&v.x) {
                *c += xi / n as f64;
            }
        }
        let toward = |from: &[f64], coeff: f64| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, f)| c + coeff * (f - c)).collect()
        };

        let worst = &simplex[n];
        let reflected = make(toward(&worst.x, -REFLECT));
        if reflected.value > simplex[0].value {
            let expanded = make(toward(&reflected.x, EXPAND));
            simplex[n] = if expanded.value > reflected.value { expanded } else { reflected };
            continue;
        }
        if reflected.value > simplex[n - 1].value {
            simplex[n] = reflected;
            continue;
        }
        let contracted = if reflected.value > worst.value {
            let c = make(toward(&reflected.x, CONTRACT));
            (c.value >= reflected.value).then_some(c)
        } else {
            let c = make(toward(&worst.x, CONTRACT));
            (c.value > worst.value).then_some(c)
        };
        match contracted {
            Some(c) => simplex[n] = c,
            None => {
                let best = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x = best.iter().zip(&v.x).map(|(b, xi)| b + SHRINK * (xi - b)).collect();
                    *v = make(x);
                }
            }
        }
    }

    let best = simplex.swap_remove(0);
    Outcome { x: best.x, value: best.value }
}
