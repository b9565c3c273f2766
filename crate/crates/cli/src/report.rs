//! Structural analysis of one constraint, serialized as JSON.

use std::collections::BTreeMap;
use std::time::Instant;

use losscape::{
    connected_components, cubical_set, homology, implicant_graph, minimal_cover, mixture_bounds, prime_implicants,
    Error, Formula, Limits, Result,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub count: usize,
    /// World patterns per component, variable 0 first.
    pub members: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_components: usize,
    pub upper: usize,
    pub simplex_lower: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub formula: String,
    pub vars: Vec<String>,
    pub n: usize,
    pub seed: u64,
    pub num_possible_worlds: usize,
    /// Patterns over the variables in order: `0`, `1` or `*`.
    pub prime_implicants: Vec<String>,
    pub prime_implicant_literals: Vec<String>,
    pub minimal_cover: Vec<String>,
    pub is_convex: bool,
    pub nonconvexity_witness: Option<Witness>,
    pub implicant_graph_edges: usize,
    pub connected_components: Components,
    pub betti: Option<Vec<usize>>,
    /// Torsion coefficients per dimension, as decimal strings.
    pub torsion: Option<Vec<Vec<String>>>,
    pub mixture_bounds: Bounds,
    pub elapsed_us: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyzeOptions {
    pub skip_homology: bool,
    pub seed: u64,
}

struct Timer(BTreeMap<String, u64>);

impl Timer {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.0.insert(stage.to_string(), start.elapsed().as_micros() as u64);
        Ok(out)
    }
}

pub fn analyze(f: &Formula, opts: AnalyzeOptions, limits: &Limits) -> Result<AnalysisReport> {
    let mut timer = Timer(BTreeMap::new());
    let n = f.n();
    let worlds = timer.time("enumerate", || f.possible_worlds(limits))?;
    if worlds.is_empty() {
        return Err(Error::Unsatisfiable);
    }
    let pis = timer.time("prime_implicants", || prime_implicants(f, limits))?;
    let cover = timer.time("minimal_cover", || minimal_cover(&pis, f, limits))?;
    let graph = timer.time("implicant_graph", || implicant_graph(f, &pis, limits))?;
    let components = timer.time("components", || Ok(connected_components(&graph)))?;
    let cs = timer.time("cubical_set", || cubical_set(f, limits))?;
    let witness = cs.nonconvexity_witness().map(|(x, y, lambda)| Witness { x, y, lambda });
    let h = if opts.skip_homology {
        None
    } else {
        Some(timer.time("homology", || homology(&cs, limits))?)
    };
    let bounds = timer.time("mixture_bounds", || mixture_bounds(f, limits))?;
    Ok(AnalysisReport {
        schema: SCHEMA,
        formula: f.to_string(),
        vars: f.vars().to_vec(),
        n,
        seed: opts.seed,
        num_possible_worlds: worlds.len(),
        prime_implicants: pis.patterns(),
        prime_implicant_literals: pis.items().iter().map(|p| p.literals(f.vars())).collect(),
        minimal_cover: cover.iter().map(|p| p.pattern(n)).collect(),
        is_convex: pis.len() == 1,
        nonconvexity_witness: witness,
        implicant_graph_edges: graph.edge_count(),
        connected_components: Components {
            count: components.len(),
            members: components
                .iter()
                .map(|c| c.iter().map(|w| w.pattern(n)).collect())
                .collect(),
        },
        betti: h.as_ref().map(|h| h.betti.clone()),
        torsion: h.map(|h| {
            h.torsion
                .iter()
                .map(|t| t.iter().map(ToString::to_string).collect())
                .collect()
        }),
        mixture_bounds: Bounds {
            min_components: bounds.min_components,
            upper: bounds.upper,
            simplex_lower: bounds.simplex_lower,
        },
        elapsed_us: timer.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin;

    #[test]
    fn traffic_report() {
        let r = analyze(&builtin("traffic").unwrap(), AnalyzeOptions::default(), &Limits::default()).unwrap();
        assert_eq!(r.prime_implicants, vec!["0*", "*0"]);
        assert_eq!(r.prime_implicant_literals, vec!["!r", "!g"]);
        assert!(!r.is_convex);
        assert_eq!(r.connected_components.count, 1);
        assert_eq!(r.betti, Some(vec![1, 0]));
        assert_eq!(r.mixture_bounds.min_components, 2);
    }

    #[test]
    fn json_round_trip() {
        let r = analyze(&builtin("hole").unwrap(), AnalyzeOptions::default(), &Limits::default()).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn unsatisfiable() {
        let f = Formula::parse("a & !a").unwrap();
        assert_eq!(analyze(&f, AnalyzeOptions::default(), &Limits::default()), Err(Error::Unsatisfiable));
    }
}
