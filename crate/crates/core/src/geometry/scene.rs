//! Scenes: finite collections of sets with a common reference point.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Node, SetExpr};
use crate::error::{Error, Result};
use crate::linalg::{add, check_dim, norm2, Norm, Point};

#[derive(Debug, Clone)]
pub struct Scene {
    pub name: Option<String>,
    pub sets: Vec<SetExpr>,
    pub xbar: Point,
    pub intersection: Option<SetExpr>,
    pub labels: Vec<String>,
    pub norm: Norm,
}

impl Scene {
    pub fn new(
        sets: Vec<SetExpr>,
        xbar: Point,
        intersection: Option<SetExpr>,
        labels: Vec<String>,
        norm: Norm,
    ) -> Result<Self> {
        if sets.len() < 2 {
            return Err(Error::Schema("a scene needs at least two sets".into()));
        }
        let dim = xbar.len();
        if dim == 0 {
            return Err(Error::Schema("xbar is empty".into()));
        }
        for s in sets.iter().chain(intersection.iter()) {
            if s.dim() != dim {
                return Err(Error::Dimension { expected: dim, got: s.dim() });
            }
            s.check_norm(&norm)?;
        }
        let tol = 1e-12 * norm2(&xbar).max(1.0);
        for (i, s) in sets.iter().enumerate() {
            let d = s.dist(&xbar);
            if d > tol {
                return Err(Error::NotInIntersection { set: i, distance: d });
            }
        }
        if let Some(int) = &intersection {
            let d = int.dist(&xbar);
            if d > tol {
                return Err(Error::BadIntersection(format!(
                    "xbar is at distance {d:e} from the declared intersection"
                )));
            }
            check_intersection(&sets, int, &xbar)?;
        }
        if !labels.is_empty() && labels.len() != sets.len() {
            return Err(Error::Schema("labels must match the number of sets".into()));
        }
        Ok(Scene { name: None, sets, xbar, intersection, labels, norm })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.xbar.len()
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn is_convex(&self) -> bool {
        self.sets.iter().all(|s| s.is_convex())
    }

    /// d(x, set i) in the scene norm.
    #[inline]
    pub fn dist_to(&self, i: usize, x: &[f64]) -> f64 {
        self.sets[i].dist_in(x, &self.norm)
    }

    /// max_i d(x, set i).
    pub fn max_dist(&self, x: &[f64]) -> f64 {
        (0..self.m()).map(|i| self.dist_to(i, x)).fold(0.0, f64::max)
    }

    /// max_i d(x + shifts[i], set i).
    pub fn max_dist_shifted(&self, x: &[f64], shifts: &[Point]) -> f64 {
        (0..self.m())
            .map(|i| self.dist_to(i, &add(x, &shifts[i])))
            .fold(0.0, f64::max)
    }

    /// Exact distance to the declared intersection, if there is one.
    pub fn intersection_dist(&self, x: &[f64]) -> Option<f64> {
        self.intersection.as_ref().map(|s| s.dist_in(x, &self.norm))
    }

    /// The scene moved rigidly by v.
    pub fn translated(&self, v: &[f64]) -> Result<Scene> {
        check_dim(self.dim(), v)?;
        let mv = |s: &SetExpr| SetExpr::translate(s.clone(), v.to_vec());
        let sets = self.sets.iter().map(mv).collect::<Result<Vec<_>>>()?;
        let int = self.intersection.as_ref().map(mv).transpose()?;
        let mut sc = Scene::new(sets, add(&self.xbar, v), int, self.labels.clone(), self.norm.clone())?;
        sc.name = self.name.clone();
        Ok(sc)
    }

    /// The scene moved so that xbar is the origin.
    pub fn centered(&self) -> Result<Scene> {
        let v: Point = self.xbar.iter().map(|t| -t).collect();
        let sets = self.sets.iter().map(|s| s.shifted(&v)).collect();
        let int = self.intersection.as_ref().map(|s| s.shifted(&v));
        let mut sc = Scene::new(sets, vec![0.0; self.dim()], int, self.labels.clone(), self.norm.clone())?;
        sc.name = self.name.clone();
        Ok(sc)
    }

    /// Every set scaled by t about xbar.
    pub fn scaled(&self, t: f64) -> Result<Scene> {
        let sets = self.sets.iter().map(|s| s.scaled_about(&self.xbar, t)).collect::<Result<Vec<_>>>()?;
        let int = self.intersection.as_ref().map(|s| s.scaled_about(&self.xbar, t)).transpose()?;
        let mut sc = Scene::new(sets, self.xbar.clone(), int, self.labels.clone(), self.norm.clone())?;
        sc.name = self.name.clone();
        Ok(sc)
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        if let Some(n) = &self.name {
            obj.insert("name".into(), Value::from(n.clone()));
        }
        obj.insert("dim".into(), Value::from(self.dim()));
        obj.insert("xbar".into(), serde_json::to_value(&self.xbar).unwrap());
        obj.insert("sets".into(), Value::Array(self.sets.iter().map(set_to_json).collect()));
        if let Some(int) = &self.intersection {
            obj.insert("intersection".into(), set_to_json(int));
        }
        if !self.labels.is_empty() {
            obj.insert("labels".into(), serde_json::to_value(&self.labels).unwrap());
        }
        if !self.norm.is_euclidean() {
            obj.insert("norm_blocks".into(), serde_json::to_value(self.norm.block_sizes()).unwrap());
        }
        Value::Object(obj)
    }
}

/// Members of the declared intersection near xbar must lie in every set.
fn check_intersection(sets: &[SetExpr], int: &SetExpr, xbar: &[f64]) -> Result<()> {
    let dim = xbar.len();
    let n: usize = match dim {
        1 => 41,
        2 => 13,
        3 => 7,
        _ => 3,
    };
    let mut idx = vec![0usize; dim];
    loop {
        let p: Point = (0..dim)
            .map(|k| xbar[k] - 1.0 + 2.0 * idx[k] as f64 / (n - 1) as f64)
            .collect();
        for q in [p.clone(), int.proj(&p)] {
            if int.dist(&q) <= 1e-9 {
                for (i, s) in sets.iter().enumerate() {
                    let d = s.dist(&q);
                    if d > 1e-8 * (1.0 + norm2(&q)) {
                        return Err(Error::BadIntersection(format!(
                            "point {q:?} of the declared intersection is at distance {d:e} from set {i}"
                        )));
                    }
                }
            }
        }
        let mut k = 0;
        loop {
            if k == dim {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Bound {
    Num(f64),
    Text(String),
}

impl Bound {
    fn value(&self) -> Result<f64> {
        match self {
            Bound::Num(v) => Ok(*v),
            Bound::Text(s) => match s.trim() {
                "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
                "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
                other => Err(Error::Schema(format!("bad box bound {other:?}"))),
            },
        }
    }

    fn from_value(v: f64) -> Bound {
        if v == f64::INFINITY {
            Bound::Text("inf".into())
        } else if v == f64::NEG_INFINITY {
            Bound::Text("-inf".into())
        } else {
            Bound::Num(v)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RowDto {
    a: Vec<f64>,
    b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum SetDto {
    Halfspace { a: Vec<f64>, b: f64 },
    Ball { c: Vec<f64>, r: f64 },
    Box { lo: Vec<Bound>, hi: Vec<Bound> },
    Affine { p: Vec<f64>, #[serde(default)] basis: Vec<Vec<f64>> },
    Polyhedron { rows: Vec<RowDto> },
    ParabolaEpi { c: f64 },
    Union { children: Vec<SetDto> },
    Translate { child: Box<SetDto>, offset: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDto {
    #[serde(default)]
    name: Option<String>,
    dim: usize,
    xbar: Vec<f64>,
    sets: Vec<Value>,
    #[serde(default)]
    intersection: Option<Value>,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    norm_blocks: Option<Vec<usize>>,
}

fn build(dto: SetDto, dim: usize) -> Result<SetExpr> {
    let check = |v: &[f64]| check_dim(dim, v);
    match dto {
        SetDto::Halfspace { a, b } => {
            check(&a)?;
            SetExpr::halfspace(a, b)
        }
        SetDto::Ball { c, r } => {
            check(&c)?;
            SetExpr::ball(c, r)
        }
        SetDto::Box { lo, hi } => {
            let lo = lo.iter().map(Bound::value).collect::<Result<Vec<_>>>()?;
            let hi = hi.iter().map(Bound::value).collect::<Result<Vec<_>>>()?;
            check(&lo)?;
            check(&hi)?;
            SetExpr::boxed(lo, hi)
        }
        SetDto::Affine { p, basis } => {
            check(&p)?;
            SetExpr::affine(p, basis)
        }
        SetDto::Polyhedron { rows } => {
            SetExpr::polyhedron(dim, rows.into_iter().map(|r| (r.a, r.b)).collect())
        }
        SetDto::ParabolaEpi { c } => {
            if dim != 2 {
                return Err(Error::Dimension { expected: 2, got: dim });
            }
            SetExpr::parabola_epi(c)
        }
        SetDto::Union { children } => {
            SetExpr::union(children.into_iter().map(|c| build(c, dim)).collect::<Result<_>>()?)
        }
        SetDto::Translate { child, offset } => {
            check(&offset)?;
            SetExpr::translate(build(*child, dim)?, offset)
        }
    }
}

fn to_dto(s: &SetExpr) -> SetDto {
    match s.node() {
        Node::Halfspace { a, b } => SetDto::Halfspace { a: a.clone(), b: *b },
        Node::Ball { c, r } => SetDto::Ball { c: c.clone(), r: *r },
        Node::Box { lo, hi } => SetDto::Box {
            lo: lo.iter().map(|v| Bound::from_value(*v)).collect(),
            hi: hi.iter().map(|v| Bound::from_value(*v)).collect(),
        },
        Node::Affine { p, basis } => SetDto::Affine { p: p.clone(), basis: basis.clone() },
        Node::Polyhedron(p) => SetDto::Polyhedron {
            rows: p.rows().map(|(a, b)| RowDto { a: a.to_vec(), b }).collect(),
        },
        Node::ParabolaEpi { c } => SetDto::ParabolaEpi { c: *c },
        Node::Union(ch) => SetDto::Union { children: ch.iter().map(to_dto).collect() },
        Node::Translate { child, offset } => {
            SetDto::Translate { child: Box::new(to_dto(child)), offset: offset.clone() }
        }
    }
}

pub fn set_to_json(s: &SetExpr) -> Value {
    serde_json::to_value(to_dto(s)).expect("set serializes")
}

/// Parses one set object of the scene schema.
pub fn parse_set(v: &Value, dim: usize) -> Result<SetExpr> {
    let dto: SetDto = serde_json::from_value(v.clone()).map_err(|e| Error::Schema(format!("set: {e}")))?;
    build(dto, dim)
}

/// Parses and validates a scene document.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let dto: SceneDto = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if dto.dim == 0 {
        return Err(Error::Schema("dim must be at least 1".into()));
    }
    check_dim(dto.dim, &dto.xbar)?;
    let sets = dto
        .sets
        .iter()
        .enumerate()
        .map(|(i, v)| parse_set(v, dto.dim).map_err(|e| tag_set(e, i)))
        .collect::<Result<Vec<_>>>()?;
    let intersection = dto.intersection.as_ref().map(|v| parse_set(v, dto.dim)).transpose()?;
    let norm = match dto.norm_blocks {
        Some(b) => Norm::blocks(b)?,
        None => Norm::euclidean(dto.dim),
    };
    if norm.dim() != dto.dim {
        return Err(Error::Schema("norm blocks do not add up to dim".into()));
    }
    let mut sc = Scene::new(sets, dto.xbar, intersection, dto.labels, norm)?;
    sc.name = dto.name;
    Ok(sc)
}

fn tag_set(e: Error, i: usize) -> Error {
    match e {
        Error::Schema(m) => Error::Schema(format!("sets[{i}]: {m}")),
        Error::InvalidSet(m) => Error::InvalidSet(format!("sets[{i}]: {m}")),
        other => other,
    }
}
