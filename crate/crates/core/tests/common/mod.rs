#![allow(dead_code)]

use objrt::{ClassId, GenericId, MethodKind, Runtime, TypeTag, Value};
use rand::Rng;

/// A class tree under `Object`, kept independently of the registry.
/// `parent[i] == None` means the class derives directly from `Object`.
#[derive(Debug, Clone)]
pub struct Tree {
    pub parent: Vec<Option<usize>>,
}

impl Tree {
    pub fn random(rng: &mut impl Rng, max_classes: usize, max_depth: usize) -> Tree {
        let n = rng.gen_range(1..=max_classes);
        let mut parent = Vec::with_capacity(n);
        let mut depth: Vec<usize> = Vec::with_capacity(n);
        for _ in 0..n {
            let candidates: Vec<usize> = (0..parent.len()).filter(|&j| depth[j] < max_depth).collect();
            let p = if candidates.is_empty() || rng.gen_bool(0.25) {
                None
            } else {
                Some(candidates[rng.gen_range(0..candidates.len())])
            };
            depth.push(p.map_or(1, |j| depth[j] + 1));
            parent.push(p);
        }
        Tree { parent }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    /// Inheritance depth, `Object` being 0.
    pub fn depth(&self, i: usize) -> u32 {
        let mut d = 1;
        let mut c = i;
        while let Some(p) = self.parent[c] {
            d += 1;
            c = p;
        }
        d
    }

    /// `a` is `b` or derives from it. `None` stands for `Object`.
    pub fn is_sub(&self, a: Option<usize>, b: Option<usize>) -> bool {
        let Some(target) = b else { return true };
        let mut c = a;
        while let Some(i) = c {
            if i == target {
                return true;
            }
            c = self.parent[i];
        }
        false
    }

    pub fn depth_of(&self, c: Option<usize>) -> u32 {
        c.map_or(0, |i| self.depth(i))
    }

    /// Defines the classes as `prefix0`, `prefix1`, ... in index order.
    pub fn define(&self, rt: &mut Runtime, prefix: &str) -> Vec<ClassId> {
        let object = rt.kernel().object.class;
        let mut ids: Vec<ClassId> = Vec::with_capacity(self.len());
        for (i, p) in self.parent.iter().enumerate() {
            let sup = p.map_or(object, |j| ids[j]);
            let t = rt
                .define_class(&format!("{prefix}{i}"), Some(sup), &[])
                .expect("class definition");
            ids.push(t.class);
        }
        ids
    }
}

/// Method as seen by the oracle: specializers (`None` for `Object`),
/// kind and definition order.
#[derive(Debug, Clone)]
pub struct SpecMethod {
    pub specs: Vec<Option<usize>>,
    pub kind: MethodKind,
    pub seq: usize,
}

/// Most specific applicable method by brute force: maximum over the
/// applicable ones of (depth sum, depth vector, around over primary,
/// later definition).
pub fn oracle_select(tree: &Tree, methods: &[SpecMethod], recv: &[Option<usize>]) -> Option<usize> {
    methods
        .iter()
        .enumerate()
        .filter(|(_, m)| m.specs.len() == recv.len() && m.specs.iter().zip(recv).all(|(&s, &r)| tree.is_sub(r, s)))
        .max_by_key(|(_, m)| {
            let depths: Vec<u32> = m.specs.iter().map(|&s| tree.depth_of(s)).collect();
            let sum: u32 = depths.iter().sum();
            (sum, depths, m.kind == MethodKind::Around, m.seq)
        })
        .map(|(i, _)| i)
}

/// A random generic with random methods returning their index.
pub struct RandomGeneric {
    pub id: GenericId,
    pub rank: usize,
    pub methods: Vec<SpecMethod>,
}

pub fn random_generic(
    rng: &mut impl Rng,
    rt: &mut Runtime,
    tree: &Tree,
    ids: &[ClassId],
    name: &str,
    rank: usize,
    max_methods: usize,
) -> RandomGeneric {
    let object = rt.kernel().object.class;
    let g = rt
        .define_generic(name, rank, &[], Some(TypeTag::Int))
        .expect("generic definition");
    let mut methods: Vec<SpecMethod> = Vec::new();
    let wanted = rng.gen_range(1..=max_methods);
    for _ in 0..wanted * 2 {
        if methods.len() == wanted {
            break;
        }
        let specs: Vec<Option<usize>> = (0..rank)
            .map(|_| {
                if rng.gen_bool(0.15) {
                    None
                } else {
                    Some(rng.gen_range(0..tree.len()))
                }
            })
            .collect();
        let kind = if rng.gen_bool(0.2) {
            MethodKind::Around
        } else {
            MethodKind::Primary
        };
        if methods.iter().any(|m| m.specs == specs && m.kind == kind) {
            continue;
        }
        let classes: Vec<ClassId> = specs.iter().map(|s| s.map_or(object, |i| ids[i])).collect();
        let index = methods.len() as i64;
        let mut b = rt.method(g, &classes);
        if kind == MethodKind::Around {
            b = b.around();
        }
        b.define(move |_, f| {
            f.set_ret(Value::Int(index));
            Ok(())
        })
        .expect("method definition");
        methods.push(SpecMethod {
            specs,
            kind,
            seq: methods.len(),
        });
    }
    RandomGeneric {
        id: g,
        rank,
        methods,
    }
}

pub fn random_receivers(rng: &mut impl Rng, tree: &Tree, rank: usize) -> Vec<Option<usize>> {
    (0..rank)
        .map(|_| {
            if rng.gen_bool(0.05) {
                None
            } else {
                Some(rng.gen_range(0..tree.len()))
            }
        })
        .collect()
}

/// Renders specializer lists as `(A,B)(..)`.
pub fn render(names: &[(ClassId, &str)], specs: &[&[ClassId]]) -> String {
    specs
        .iter()
        .map(|s| {
            let parts: Vec<&str> = s
                .iter()
                .map(|c| names.iter().find(|(id, _)| id == c).map(|(_, n)| *n).unwrap_or("?"))
                .collect();
            format!("({})", parts.join(","))
        })
        .collect()
}
