//! Closures and lazy expressions.
//!
//! A `Functor` object holds a term tree: bound objects, placeholders and
//! generic applications. Placeholders are either anonymous (the `Var`
//! class-object, numbered left to right) or indexed (`Var` instances).
//! Sending an object-returning message to a lazy operand builds a new
//! functor instead of running the message. `geval` .. `geval4` substitute
//! arguments; once no placeholder is left the term is evaluated through
//! ordinary dispatch.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception};
use crate::generics::GenericId;
use crate::runtime::Runtime;
use crate::value::{Obj, TypeTag, Value};

#[derive(Debug, Clone)]
pub enum Term {
    Val(Obj),
    Anon,
    Var(usize),
    Apply(Arc<Apply>),
}

#[derive(Debug)]
pub struct Apply {
    pub op: GenericId,
    pub operands: Vec<Term>,
    pub args: Vec<Value>,
}

#[derive(Debug, Default)]
struct Placeholders {
    anon: usize,
    indexed: BTreeSet<usize>,
}

impl Term {
    fn scan(&self, p: &mut Placeholders) {
        match self {
            Term::Val(_) => {}
            Term::Anon => p.anon += 1,
            Term::Var(i) => {
                p.indexed.insert(*i);
            }
            Term::Apply(a) => a.operands.iter().for_each(|t| t.scan(p)),
        }
    }

    fn placeholders(&self) -> Placeholders {
        let mut p = Placeholders::default();
        self.scan(&mut p);
        p
    }

    /// Number of arguments still expected. Mixing anonymous and indexed
    /// placeholders is rejected.
    pub fn arity(&self) -> Result<usize, Exception> {
        let p = self.placeholders();
        match (p.anon, p.indexed.last()) {
            (0, None) => Ok(0),
            (n, None) => Ok(n),
            (0, Some(&max)) => Ok(max + 1),
            _ => Err(Exception::builtin(
                ExKind::BadValue,
                "anonymous and indexed placeholders cannot be mixed",
            )),
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(Option<usize>) -> Term) -> Term {
        match self {
            Term::Val(o) => Term::Val(o.clone()),
            Term::Anon => f(None),
            Term::Var(i) => f(Some(*i)),
            Term::Apply(a) => Term::Apply(Arc::new(Apply {
                op: a.op,
                operands: a.operands.iter().map(|t| t.map_vars(f)).collect(),
                args: a.args.clone(),
            })),
        }
    }
}

fn functor_term(rt: &Runtime, obj: &Obj) -> Option<Arc<Term>> {
    let k = rt.kernel();
    if !obj.as_instance().is_some() || !rt.registry().is_kind_of(obj.class_id(), k.functor.class) {
        return None;
    }
    match obj.get(k.term_slot).ok()? {
        Value::Native(n) => n.downcast::<Term>().ok(),
        _ => None,
    }
}

fn is_anon(rt: &Runtime, obj: &Obj) -> bool {
    obj.as_class().is_some_and(|c| c.class == rt.kernel().var.class)
}

/// Turns an operand into a term: placeholders and functors are spliced in,
/// anything else is bound as a value.
fn lift(rt: &Runtime, obj: &Obj) -> Term {
    let k = rt.kernel();
    if is_anon(rt, obj) {
        return Term::Anon;
    }
    if obj.as_instance().is_some() && rt.registry().is_kind_of(obj.class_id(), k.var.class) {
        if let Ok(i) = obj.get_int(k.var_slot) {
            return Term::Var(i.max(0) as usize);
        }
    }
    match functor_term(rt, obj) {
        Some(t) => (*t).clone(),
        None => Term::Val(obj.clone()),
    }
}

fn is_lazy(rt: &Runtime, obj: &Obj) -> bool {
    let k = rt.kernel();
    is_anon(rt, obj) || (obj.as_instance().is_some() && rt.registry().is_kind_of(obj.class_id(), k.lazy.class))
}

/// Renumbers indexed placeholders to `0..n` keeping their order.
fn compress(term: &Term) -> Term {
    let p = term.placeholders();
    let order: Vec<usize> = p.indexed.into_iter().collect();
    term.map_vars(&mut |v| match v {
        None => Term::Anon,
        Some(i) => Term::Var(order.binary_search(&i).unwrap()),
    })
}

fn bad_arity(msg: impl Into<Arc<str>>) -> Exception {
    Exception::builtin(ExKind::BadArity, msg)
}

pub(crate) fn install(rt: &mut Runtime) -> Result<(), DefineError> {
    let k = rt.kernel().clone();
    let object = k.object.class;
    for rank in 1..=5 {
        for pos in 0..rank {
            for lazy_class in [k.lazy.class, k.var.meta] {
                let mut specs = vec![object; rank];
                specs[pos] = lazy_class;
                rt.method(k.gum[rank - 1], &specs).define(|ctx, frame| {
                    let rt = ctx.runtime();
                    let gen = rt.generic(frame.sel());
                    if gen.ret != Some(TypeTag::Obj) {
                        return Err(Exception::builtin(
                            ExKind::NotSupported,
                            format!("{} cannot be evaluated lazily", gen.name),
                        ));
                    }
                    let term = Term::Apply(Arc::new(Apply {
                        op: frame.sel(),
                        operands: frame.receivers().iter().map(|o| lift(rt, o)).collect(),
                        args: frame.args().unpack(frame.layout()),
                    }));
                    let f = ctx.new_functor(term)?;
                    frame.set_ret(f);
                    Ok(())
                })?;
            }
        }
        let mut specs = vec![object; rank];
        specs[0] = k.functor.class;
        rt.method(k.geval[rank - 1], &specs).define(|ctx, frame| {
            let rt = ctx.runtime();
            let term = functor_term(rt, frame.this())
                .ok_or_else(|| Exception::builtin(ExKind::BadValue, "functor without a term"))?;
            let out = ctx.apply_term(&term, &frame.receivers()[1..])?;
            frame.set_ret(out);
            Ok(())
        })?;
    }
    Ok(())
}

impl Context<'_> {
    fn new_functor(&mut self, term: Term) -> Result<Obj, Exception> {
        term.arity()?;
        let rt = self.runtime();
        let k = rt.kernel();
        let obj = rt.allocate(k.functor.class)?;
        obj.set(k.term_slot, Value::Native(Arc::new(term)))?;
        Ok(obj)
    }

    /// The anonymous placeholder.
    pub fn anon_var(&self) -> Obj {
        let rt = self.runtime();
        rt.class_object(rt.kernel().var.class)
    }

    /// Indexed placeholder `i`.
    pub fn var(&mut self, i: usize) -> Result<Obj, Exception> {
        let rt = self.runtime();
        let k = rt.kernel();
        let obj = rt.allocate(k.var.class)?;
        obj.set_int(k.var_slot, i as i64)?;
        Ok(obj)
    }

    /// A functor applying `g`. Missing trailing receivers become anonymous
    /// placeholders; closed arguments must all be given.
    pub fn make_functor(&mut self, g: GenericId, args: &[Obj], closed: &[Value]) -> Result<Obj, Exception> {
        let rt = self.runtime();
        let gen = rt.generic(g);
        if args.len() > gen.rank {
            return Err(bad_arity(format!(
                "{} takes {} receivers, got {}",
                gen.name,
                gen.rank,
                args.len()
            )));
        }
        if closed.len() != gen.closed.len() {
            return Err(bad_arity(format!(
                "{} takes {} closed arguments, got {}",
                gen.name,
                gen.closed.len(),
                closed.len()
            )));
        }
        if closed.iter().any(|v| v.as_obj().is_some_and(|o| is_lazy(rt, o))) {
            return Err(Exception::builtin(ExKind::BadValue, "placeholder in a closed position"));
        }
        let mut operands: Vec<Term> = args.iter().map(|o| lift(rt, o)).collect();
        operands.resize(gen.rank, Term::Anon);
        let term = compress(&Term::Apply(Arc::new(Apply {
            op: g,
            operands,
            args: closed.to_vec(),
        })));
        self.new_functor(term)
    }

    /// Arity of a functor object, `None` for other objects.
    pub fn functor_arity(&self, obj: &Obj) -> Option<usize> {
        functor_term(self.runtime(), obj).and_then(|t| t.arity().ok())
    }

    /// `geval_n(fun, args...)`.
    pub fn eval(&mut self, fun: &Obj, args: &[Obj]) -> Result<Obj, Exception> {
        if args.len() > 4 {
            return Err(bad_arity("at most 4 arguments can be passed to a functor"));
        }
        let g = self.runtime().kernel().geval[args.len()];
        let mut receivers = Vec::with_capacity(args.len() + 1);
        receivers.push(fun.clone());
        receivers.extend_from_slice(args);
        self.send_obj(g, &receivers, &[])
    }

    fn apply_term(&mut self, term: &Term, args: &[Obj]) -> Result<Obj, Exception> {
        let rt = self.runtime();
        let arity = term.arity()?;
        if args.len() > arity {
            return Err(bad_arity(format!("functor of arity {arity} given {} arguments", args.len())));
        }
        if arity == 0 {
            return self.eval_term(term);
        }
        let k = args.len();
        let anon_given: Vec<bool> = args.iter().map(|a| is_anon(rt, a)).collect();
        let a = anon_given.iter().filter(|&&b| b).count();
        let mut next_anon = 0usize;
        let substituted = term.map_vars(&mut |v| {
            let idx = match v {
                None => {
                    let n = next_anon;
                    next_anon += 1;
                    if n >= k {
                        return Term::Anon;
                    }
                    n
                }
                Some(i) if i >= k => return Term::Var(a + (i - k)),
                Some(i) => i,
            };
            if anon_given[idx] {
                match v {
                    None => Term::Anon,
                    Some(_) => Term::Var(anon_given[..idx].iter().filter(|&&b| b).count()),
                }
            } else {
                lift(rt, &args[idx])
            }
        });
        if substituted.arity()? == 0 {
            self.eval_term(&substituted)
        } else {
            self.new_functor(substituted)
        }
    }

    fn eval_term(&mut self, term: &Term) -> Result<Obj, Exception> {
        match term {
            Term::Val(o) => Ok(o.clone()),
            Term::Anon | Term::Var(_) => Err(bad_arity("unbound placeholder")),
            Term::Apply(app) => {
                let receivers = app
                    .operands
                    .iter()
                    .map(|t| self.eval_term(t))
                    .collect::<Result<Vec<_>, _>>()?;
                match self.send(app.op, &receivers, &app.args)? {
                    Value::Obj(o) => Ok(o),
                    Value::Void => Ok(self.runtime().nil()),
                    other => Err(Exception::builtin(
                        ExKind::NotSupported,
                        format!("functor result {other:?} is not an object"),
                    )),
                }
            }
        }
    }
}
