//! Set-valued mappings given by their graphs, the product mapping of a
//! collection of sets and the two-set graph construction.

mod bridge;
mod estimators;

pub use bridge::{verify_bridge_prop8, verify_bridge_thm5, BridgeReport, Direction, Inequality, Triple};
pub use estimators::{reg_modulus, semireg_modulus, subreg_modulus};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{parse_set, set_to_json, Node, Polyhedron, RegionSearch, Scene, SetExpr};
use crate::linalg::{check_dim, Norm, Point};
use crate::moduli::Ctx;

#[derive(Debug, Clone)]
pub enum Graph {
    /// An explicit graph in R^{dim_x + dim_y}.
    Set(SetExpr),
    /// {(x, u_1, ..., u_m) : x + u_i in Omega_i for all i}.
    Product(Scene),
}

/// F : R^dim_x => R^dim_y with a base point of its graph.
#[derive(Debug, Clone)]
pub struct SvMapping {
    pub name: Option<String>,
    pub dim_x: usize,
    pub dim_y: usize,
    pub graph: Graph,
    pub xbar: Point,
    pub ybar: Point,
}

fn concat(x: &[f64], y: &[f64]) -> Point {
    let mut z = x.to_vec();
    z.extend_from_slice(y);
    z
}

impl SvMapping {
    pub fn new(dim_x: usize, dim_y: usize, graph: SetExpr, xbar: Point, ybar: Point) -> Result<Self> {
        if dim_x == 0 || dim_y == 0 {
            return Err(Error::Schema("dim_x and dim_y must be positive".into()));
        }
        check_dim(dim_x + dim_y, &vec![0.0; graph.dim()])?;
        check_dim(dim_x, &xbar)?;
        check_dim(dim_y, &ybar)?;
        let z = concat(&xbar, &ybar);
        let d = graph.dist(&z);
        if d > 1e-12 * (1.0 + crate::linalg::norm2(&z)) {
            return Err(Error::NotInIntersection { set: 0, distance: d });
        }
        Ok(SvMapping { name: None, dim_x, dim_y, graph: Graph::Set(graph), xbar, ybar })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn x_norm(&self) -> Norm {
        match &self.graph {
            Graph::Set(_) => Norm::euclidean(self.dim_x),
            Graph::Product(sc) => sc.norm.clone(),
        }
    }

    /// Y-norm: Euclidean, or the maximum of the component norms for a
    /// product mapping.
    pub fn y_norm(&self) -> Norm {
        match &self.graph {
            Graph::Set(_) => Norm::euclidean(self.dim_y),
            Graph::Product(sc) => Norm::blocks(vec![sc.dim(); sc.m()]).expect("positive blocks"),
        }
    }

    fn blocks<'a>(&self, y: &'a [f64]) -> Vec<&'a [f64]> {
        match &self.graph {
            Graph::Product(sc) => y.chunks(sc.dim()).collect(),
            Graph::Set(_) => vec![y],
        }
    }

    /// Residual vanishing exactly on the graph.
    pub fn graph_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.graph {
            Graph::Set(g) => g.dist(&concat(x, y)),
            Graph::Product(sc) => {
                let shifts: Vec<Point> = self.blocks(y).into_iter().map(|b| b.to_vec()).collect();
                sc.max_dist_shifted(x, &shifts)
            }
        }
    }

    pub fn contains(&self, x: &[f64], y: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim_x, x)?;
        check_dim(self.dim_y, y)?;
        Ok(self.graph_residual(x, y) <= tol)
    }

    /// d(y, F(x)); None when F(x) has no point within `search` of y.
    pub fn image_dist(&self, x: &[f64], y: &[f64], search: f64, tol: f64) -> Option<f64> {
        match &self.graph {
            // d(u, F(x)) = max_i d(x + u_i, Omega_i) under the maximum norm
            Graph::Product(_) => Some(self.graph_residual(x, y)),
            Graph::Set(g) => {
                let f = |v: &[f64]| g.dist(&concat(x, v));
                RegionSearch::for_dim(self.dim_y).distance(&f, y, search, &self.y_norm(), tol, None)
            }
        }
    }

    /// d(x, F^{-1}(y)); None when F^{-1}(y) has no point within `search`.
    pub(crate) fn inverse_dist_with(&self, ctx: Option<&Ctx>, x: &[f64], y: &[f64], search: f64, tol: f64) -> Option<f64> {
        match &self.graph {
            Graph::Product(sc) => {
                let shifts: Vec<Point> = self.blocks(y).into_iter().map(|b| b.to_vec()).collect();
                if let Some(c) = ctx.and_then(|c| c.cap_dist(x, &shifts)) {
                    return c;
                }
                if let Some(int) = &sc.intersection {
                    if shifts.windows(2).all(|w| w[0] == w[1]) {
                        return Some(int.dist_in(&crate::linalg::add(x, &shifts[0]), &sc.norm));
                    }
                }
                let f = |z: &[f64]| sc.max_dist_shifted(z, &shifts);
                RegionSearch::for_dim(sc.dim()).distance(&f, x, search, &sc.norm, tol, None)
            }
            Graph::Set(g) => {
                let f = |z: &[f64]| g.dist(&concat(z, y));
                RegionSearch::for_dim(self.dim_x).distance(&f, x, search, &self.x_norm(), tol, None)
            }
        }
    }

    pub fn inverse_dist(&self, x: &[f64], y: &[f64], search: f64, tol: f64) -> Option<f64> {
        self.inverse_dist_with(None, x, y, search, tol)
    }

    /// F^{-1}(ybar) x {ybar} as a set of R^{dim_x + dim_y}, when the slice
    /// of the graph has an exact representation.
    pub fn graph_slice_at(&self, ybar: &[f64]) -> Option<SetExpr> {
        let Graph::Set(g) = &self.graph else { return None };
        let n = self.dim_x + self.dim_y;
        let fixed: Vec<(Point, f64)> = (0..self.dim_y)
            .flat_map(|k| {
                let mut e = vec![0.0; n];
                e[self.dim_x + k] = 1.0;
                let neg: Point = e.iter().map(|v| -v).collect();
                [(e, ybar[k]), (neg, -ybar[k])]
            })
            .collect();
        if let Some(mut rows) = g.polyhedral_rows() {
            if n > Polyhedron::MAX_DIM {
                return None;
            }
            rows.extend(fixed);
            let s = SetExpr::polyhedron(n, rows).ok()?;
            // collapse a single point to a degenerate ball
            let a = s.proj(&vec![1.0; n]);
            let b = s.proj(&vec![-1.0; n]);
            let c = s.proj(&(0..n).map(|k| (k as f64 + 1.0) * 0.7).collect::<Vec<_>>());
            let close = |p: &[f64], q: &[f64]| crate::linalg::dist2(p, q) < 1e-12;
            if close(&a, &b) && close(&a, &c) {
                return SetExpr::ball(a, 0.0).ok();
            }
            return Some(s);
        }
        match g.node() {
            Node::ParabolaEpi { c } if self.dim_x == 1 && self.dim_y == 1 => {
                let h = (ybar[0] / c).max(0.0).sqrt();
                if h == 0.0 {
                    SetExpr::ball(vec![0.0, ybar[0]], 0.0).ok()
                } else {
                    SetExpr::boxed(vec![-h, ybar[0]], vec![h, ybar[0]]).ok()
                }
            }
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.graph {
            Graph::Set(g) => {
                let mut v = json!({
                    "dim_x": self.dim_x,
                    "dim_y": self.dim_y,
                    "graph": set_to_json(g),
                    "xbar": self.xbar,
                    "ybar": self.ybar,
                });
                if let Some(n) = &self.name {
                    v["name"] = json!(n);
                }
                v
            }
            Graph::Product(sc) => json!({ "product_of": sc.to_json() }),
        }
    }
}

/// F(x) = (Omega_1 - x) x ... x (Omega_m - x) with base point (xbar, 0).
pub fn product_mapping(scene: &Scene) -> Result<SvMapping> {
    if !scene.norm.is_euclidean() {
        return Err(Error::Unsupported("product mapping of a scene with block norms".into()));
    }
    let dim = scene.dim();
    Ok(SvMapping {
        name: scene.name.as_ref().map(|n| format!("product({n})")),
        dim_x: dim,
        dim_y: dim * scene.m(),
        graph: Graph::Product(scene.clone()),
        xbar: scene.xbar.clone(),
        ybar: vec![0.0; dim * scene.m()],
    })
}

/// The pair {gph F, X x {ybar}} in X x Y with the maximum norm
/// max(|x|, |y|).
pub fn graph_scene(f: &SvMapping) -> Result<Scene> {
    let Graph::Set(g) = &f.graph else {
        return Err(Error::Unsupported("graph scene of a product mapping".into()));
    };
    let n = f.dim_x + f.dim_y;
    let mut p = vec![0.0; n];
    p[f.dim_x..].copy_from_slice(&f.ybar);
    let basis: Vec<Point> = (0..f.dim_x)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            e
        })
        .collect();
    let level = SetExpr::affine(p, basis)?;
    let norm = Norm::blocks(vec![f.dim_x, f.dim_y])?;
    let xbar = concat(&f.xbar, &f.ybar);
    let int = f.graph_slice_at(&f.ybar).filter(|s| s.check_norm(&norm).is_ok());
    let sc = Scene::new(vec![g.clone(), level], xbar, int, vec!["graph".into(), "level".into()], norm)?;
    Ok(match &f.name {
        Some(nm) => sc.with_name(format!("graph({nm})")),
        None => sc,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingDto {
    #[serde(default)]
    name: Option<String>,
    dim_x: usize,
    dim_y: usize,
    graph: Value,
    xbar: Vec<f64>,
    ybar: Vec<f64>,
}

/// Parses a mapping document {dim_x, dim_y, graph, xbar, ybar}.
pub fn parse_mapping(text: &str) -> Result<SvMapping> {
    let dto: MappingDto = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let g = parse_set(&dto.graph, dto.dim_x + dto.dim_y)?;
    let f = SvMapping::new(dto.dim_x, dto.dim_y, g, dto.xbar, dto.ybar)?;
    Ok(match dto.name {
        Some(n) => f.with_name(n),
        None => f,
    })
}
