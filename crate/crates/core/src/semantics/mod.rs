//! The two interpreters: set-theoretic evaluation and error derivatives.
//!
//! `eval` maps a term and an environment to a plain denotation. `derive`
//! maps a term, an environment, and an error environment to a quantale
//! element bounding how far the denotation can drift when the environment
//! entries drift within their radii. Both are structurally recursive;
//! lambdas produce environment-capturing closures.
//!
//! Both functions assume their input typechecks; feeding them ill-typed
//! terms panics.

use crate::lambda::{grid_modulus, Primitive, PrimitiveTable, SimpleType, Term, TypingContext};
use crate::quantale::{QuantaleDescriptor, QuantaleValue};
use crate::value::{CarrierDescriptor, SemValue};

use thiserror::Error;

/// How primitive moduli are computed.
///
/// `Analytic` uses the closed forms from the primitive table (exact or
/// certified over-approximations): sound for upper bounds. `Grid` evaluates
/// the primitive on a finite grid over the box: an under-approximation by
/// construction, used only to cross-check analytic forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusMode {
    Analytic,
    Grid { resolution: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ModulusError {
    #[error("primitive `{0}` has no analytic modulus and strict mode is on")]
    Missing(String),
}

/// Interpreter configuration threaded through `derive` and captured by the
/// closures it builds.
#[derive(Clone)]
pub struct EvalCtx {
    pub prims: PrimitiveTable,
    pub mode: ModulusMode,
    /// With strict on, a primitive without an analytic modulus (and without
    /// Lipschitz constants to fall back on) aborts instead of degrading.
    pub strict: bool,
}

impl EvalCtx {
    pub fn analytic(prims: PrimitiveTable) -> Self {
        EvalCtx {
            prims,
            mode: ModulusMode::Analytic,
            strict: true,
        }
    }

    pub fn grid(prims: PrimitiveTable, resolution: usize) -> Self {
        EvalCtx {
            prims,
            mode: ModulusMode::Grid { resolution },
            strict: false,
        }
    }
}

pub type Environment = Vec<SemValue>;
pub type ErrEnvironment = Vec<QuantaleValue>;

/// The quantale of radii for a type: scalars at `Real`, componentwise on
/// products, and monotone error functions at arrows.
pub fn quantale_of_type(ty: &SimpleType) -> QuantaleDescriptor {
    match ty {
        SimpleType::Real => QuantaleDescriptor::Lawvere,
        SimpleType::Prod(l, r) => {
            QuantaleDescriptor::product(quantale_of_type(l), quantale_of_type(r))
        }
        SimpleType::Arrow(dom, cod) => QuantaleDescriptor::fun_space(
            carrier_of_type(dom),
            quantale_of_type(dom),
            quantale_of_type(cod),
        ),
    }
}

/// The carrier set of a type, as a samplable descriptor.
pub fn carrier_of_type(ty: &SimpleType) -> CarrierDescriptor {
    match ty {
        SimpleType::Real => CarrierDescriptor::Real,
        SimpleType::Prod(l, r) => {
            CarrierDescriptor::pair(carrier_of_type(l), carrier_of_type(r))
        }
        SimpleType::Arrow(dom, cod) => {
            CarrierDescriptor::fun(carrier_of_type(dom), carrier_of_type(cod))
        }
    }
}

/// Set-theoretic evaluation. `env` is positional and must match `ctx`.
pub fn eval(ectx: &EvalCtx, ctx: &TypingContext, t: &Term, env: &Environment) -> SemValue {
    debug_assert_eq!(ctx.len(), env.len(), "environment does not match context");
    match t {
        Term::Var(x) => {
            let i = ctx
                .index_of(x)
                .unwrap_or_else(|| panic!("unbound variable `{x}` in eval"));
            env[i].clone()
        }
        Term::Const(r) => SemValue::Real(*r),
        Term::Prim(name, args) => {
            let prim = self_prim(ectx, name);
            let xs: Vec<f64> = args
                .iter()
                .map(|a| eval(ectx, ctx, a, env).as_real())
                .collect();
            SemValue::Real(prim.call(&xs))
        }
        Term::App(f, a) => {
            let fv = eval(ectx, ctx, f, env);
            let av = eval(ectx, ctx, a, env);
            fv.apply(&av)
        }
        Term::Lam(x, ty, body) => {
            let ectx = ectx.clone();
            let inner_ctx = ctx.extended(x.clone(), ty.clone());
            let captured = env.clone();
            let body = (**body).clone();
            SemValue::fun(t.to_string(), move |arg| {
                let mut env = captured.clone();
                env.push(arg.clone());
                eval(&ectx, &inner_ctx, &body, &env)
            })
        }
        Term::Pair(l, r) => SemValue::pair(eval(ectx, ctx, l, env), eval(ectx, ctx, r, env)),
        Term::Fst(p) => eval(ectx, ctx, p, env).fst().clone(),
        Term::Snd(p) => eval(ectx, ctx, p, env).snd().clone(),
        Term::Let(x, bound, body) => {
            let bv = eval(ectx, ctx, bound, env);
            let bty = crate::lambda::typecheck(ctx, bound, &ectx.prims)
                .expect("let-bound term must typecheck");
            let inner_ctx = ctx.extended(x.clone(), bty);
            let mut inner_env = env.clone();
            inner_env.push(bv);
            eval(ectx, &inner_ctx, body, &inner_env)
        }
    }
}

fn self_prim<'a>(ectx: &'a EvalCtx, name: &str) -> &'a Primitive {
    ectx.prims
        .get(name)
        .unwrap_or_else(|| panic!("unknown primitive `{name}`"))
}

/// The modulus of a primitive at a point: the worst output deviation over
/// the box with the given per-argument radii.
pub fn prim_modulus(
    prim: &Primitive,
    xs: &[f64],
    radii: &[f64],
    mode: ModulusMode,
    strict: bool,
) -> Result<f64, ModulusError> {
    match mode {
        ModulusMode::Analytic => {
            if let Some(m) = &prim.modulus {
                Ok(m(xs, radii))
            } else if let Some(ls) = &prim.lipschitz {
                // Certified over-approximation from per-argument slopes.
                Ok(ls
                    .iter()
                    .zip(radii)
                    .map(|(l, r)| if *l == 0.0 { 0.0 } else { l * r })
                    .sum())
            } else if strict {
                Err(ModulusError::Missing(prim.name.clone()))
            } else {
                Ok(grid_modulus(prim, xs, radii, 512))
            }
        }
        ModulusMode::Grid { resolution } => Ok(grid_modulus(prim, xs, radii, resolution)),
    }
}

/// Error-derivative evaluation. `env` and `errs` are positional against
/// `ctx`; the result lives in the quantale of the term's type.
pub fn derive(
    ectx: &EvalCtx,
    ctx: &TypingContext,
    t: &Term,
    env: &Environment,
    errs: &ErrEnvironment,
) -> QuantaleValue {
    debug_assert_eq!(ctx.len(), env.len());
    debug_assert_eq!(ctx.len(), errs.len());
    match t {
        Term::Var(x) => {
            let i = ctx
                .index_of(x)
                .unwrap_or_else(|| panic!("unbound variable `{x}` in derive"));
            errs[i].clone()
        }
        Term::Const(_) => QuantaleValue::scalar(0.0),
        Term::Prim(name, args) => {
            let prim = self_prim(ectx, name);
            let xs: Vec<f64> = args
                .iter()
                .map(|a| eval(ectx, ctx, a, env).as_real())
                .collect();
            let radii: Vec<f64> = args
                .iter()
                .map(|a| derive(ectx, ctx, a, env, errs).as_scalar())
                .collect();
            let m = prim_modulus(prim, &xs, &radii, ectx.mode, ectx.strict)
                .unwrap_or_else(|e| panic!("{e}"));
            QuantaleValue::scalar(m.max(0.0))
        }
        Term::App(f, a) => {
            let fd = derive(ectx, ctx, f, env, errs);
            let av = eval(ectx, ctx, a, env);
            let ad = derive(ectx, ctx, a, env, errs);
            fd.as_err_fun().apply(&av, &ad)
        }
        Term::Lam(x, ty, body) => {
            let ectx = ectx.clone();
            let inner_ctx = ctx.extended(x.clone(), ty.clone());
            let captured_env = env.clone();
            let captured_errs = errs.clone();
            let body = (**body).clone();
            QuantaleValue::err_fun(format!("deriv {t}"), move |arg, radius| {
                let mut env = captured_env.clone();
                env.push(arg.clone());
                let mut errs = captured_errs.clone();
                errs.push(radius.clone());
                derive(&ectx, &inner_ctx, &body, &env, &errs)
            })
        }
        Term::Pair(l, r) => QuantaleValue::pair(
            derive(ectx, ctx, l, env, errs),
            derive(ectx, ctx, r, env, errs),
        ),
        Term::Fst(p) => derive(ectx, ctx, p, env, errs).as_pair().0.clone(),
        Term::Snd(p) => derive(ectx, ctx, p, env, errs).as_pair().1.clone(),
        Term::Let(x, bound, body) => {
            let bv = eval(ectx, ctx, bound, env);
            let bd = derive(ectx, ctx, bound, env, errs);
            let bty = crate::lambda::typecheck(ctx, bound, &ectx.prims)
                .expect("let-bound term must typecheck");
            let inner_ctx = ctx.extended(x.clone(), bty);
            let mut inner_env = env.clone();
            inner_env.push(bv);
            let mut inner_errs = errs.clone();
            inner_errs.push(bd);
            derive(ectx, &inner_ctx, body, &inner_env, &inner_errs)
        }
    }
}

/// Pre-flight check that every primitive used by `t` can produce an
/// analytic modulus, so strict derivation cannot abort mid-way.
pub fn check_moduli_available(t: &Term, prims: &PrimitiveTable) -> Result<(), ModulusError> {
    match t {
        Term::Var(_) | Term::Const(_) => Ok(()),
        Term::Prim(name, args) => {
            if let Some(p) = prims.get(name) {
                if p.modulus.is_none() && p.lipschitz.is_none() {
                    return Err(ModulusError::Missing(name.clone()));
                }
            }
            args.iter().try_for_each(|a| check_moduli_available(a, prims))
        }
        Term::App(f, a) => {
            check_moduli_available(f, prims)?;
            check_moduli_available(a, prims)
        }
        Term::Lam(_, _, body) | Term::Fst(body) | Term::Snd(body) => {
            check_moduli_available(body, prims)
        }
        Term::Pair(l, r) | Term::Let(_, l, r) => {
            check_moduli_available(l, prims)?;
            check_moduli_available(r, prims)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse;

    fn ectx() -> EvalCtx {
        EvalCtx::analytic(PrimitiveTable::default_with_eps(0.1))
    }

    fn real() -> SimpleType {
        SimpleType::Real
    }

    fn ex412_ctx() -> TypingContext {
        TypingContext::new(vec![
            ("f".into(), SimpleType::arrow(real(), real())),
            ("x".into(), real()),
        ])
        .unwrap()
    }

    fn ex412_term(ectx: &EvalCtx) -> Term {
        parse("let y be add(x) in diff(f y, f x)", &ectx.prims).unwrap()
    }

    #[test]
    fn constants_and_projections_evaluate() {
        let e = ectx();
        let empty = TypingContext::empty();
        let t = parse("fst(<1.0, 2.0>)", &e.prims).unwrap();
        assert_eq!(eval(&e, &empty, &t, &vec![]).as_real(), 1.0);
        let t = Term::Const(3.25);
        assert_eq!(eval(&e, &empty, &t, &vec![]).as_real(), 3.25);
    }

    #[test]
    fn divided_difference_example_evaluates() {
        // At f = sin, x = 0 with eps = 0.1 the term computes
        // (sin 0.1 - sin 0) / 0.1.
        let e = ectx();
        let t = ex412_term(&e);
        let env = vec![SemValue::real_fun("sin", f64::sin), SemValue::Real(0.0)];
        let got = eval(&e, &ex412_ctx(), &t, &env).as_real();
        let oracle = (0.1f64.sin() - 0.0f64.sin()) / 0.1;
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
        assert!((got - 0.9983341664682815).abs() < 1e-12);
    }

    #[test]
    fn quantale_of_type_shapes() {
        assert_eq!(quantale_of_type(&real()), QuantaleDescriptor::Lawvere);
        assert_eq!(
            quantale_of_type(&SimpleType::prod(real(), real())),
            QuantaleDescriptor::product(QuantaleDescriptor::Lawvere, QuantaleDescriptor::Lawvere)
        );
        assert_eq!(
            quantale_of_type(&SimpleType::arrow(real(), real())),
            QuantaleDescriptor::fun_space(
                CarrierDescriptor::Real,
                QuantaleDescriptor::Lawvere,
                QuantaleDescriptor::Lawvere
            )
        );
    }

    #[test]
    fn derivative_base_clauses() {
        let e = ectx();
        let empty = TypingContext::empty();
        // Constants have derivative 0.
        assert_eq!(
            derive(&e, &empty, &Term::Const(9.0), &vec![], &vec![]).as_scalar(),
            0.0
        );
        // Variables project their radius.
        let ctx = TypingContext::new(vec![("x".into(), real())]).unwrap();
        let d = derive(
            &e,
            &ctx,
            &Term::var("x"),
            &vec![SemValue::Real(1.0)],
            &vec![QuantaleValue::scalar(0.25)],
        );
        assert_eq!(d.as_scalar(), 0.25);
        // fst of a literal pair of constants is 0.
        let t = parse("fst(<4.0, 5.0>)", &e.prims).unwrap();
        assert_eq!(derive(&e, &empty, &t, &vec![], &vec![]).as_scalar(), 0.0);
    }

    #[test]
    fn divided_difference_derivative_matches_closed_form() {
        // The derivative at (f, x) applied to radii (d, a) is
        // (d(x + eps, a) + d(x, a)) / eps.
        let e = ectx();
        let t = ex412_term(&e);
        let ctx = ex412_ctx();
        let eps = 0.1;
        let env = vec![SemValue::real_fun("sin", f64::sin), SemValue::Real(0.7)];
        // A representative monotone error function: d(x, a) = |x| + 2a.
        let d = QuantaleValue::err_fun("probe", |x, a| {
            QuantaleValue::scalar(x.as_real().abs() + 2.0 * a.as_scalar())
        });
        for a in [0.0, 0.01, 0.5] {
            let errs = vec![d.clone(), QuantaleValue::scalar(a)];
            let got = derive(&e, &ctx, &t, &env, &errs).as_scalar();
            let x = 0.7;
            let dd = |x: f64, a: f64| x.abs() + 2.0 * a;
            let want = (dd(x + eps, a) + dd(x, a)) / eps;
            assert!((got - want).abs() < 1e-12, "a={a}: {got} vs {want}");
        }
    }

    #[test]
    fn modulus_modes_and_strictness() {
        let prims = PrimitiveTable::default_with_eps(0.1);
        let sin = prims.get("sin").unwrap();
        let analytic =
            prim_modulus(sin, &[0.0], &[std::f64::consts::FRAC_PI_2], ModulusMode::Analytic, true)
                .unwrap();
        assert!((analytic - 1.0).abs() < 1e-12);
        let grid = prim_modulus(
            sin,
            &[0.0],
            &[std::f64::consts::FRAC_PI_2],
            ModulusMode::Grid { resolution: 2001 },
            true,
        )
        .unwrap();
        assert!(grid <= analytic + 1e-12, "grid under-approximates");
        // A primitive with no modulus and no Lipschitz data fails in strict mode.
        let bare = Primitive::new("mystery", 1, |xs| xs[0] * xs[0]);
        assert_eq!(
            prim_modulus(&bare, &[1.0], &[0.5], ModulusMode::Analytic, true),
            Err(ModulusError::Missing("mystery".into()))
        );
        assert!(prim_modulus(&bare, &[1.0], &[0.5], ModulusMode::Analytic, false).is_ok());
    }

    #[test]
    fn lambda_derivative_is_monotone_on_sampled_chain() {
        let e = ectx();
        let empty = TypingContext::empty();
        let t = parse("\\x:Real. sin(sin(x))", &e.prims).unwrap();
        let d = derive(&e, &empty, &t, &vec![], &vec![]);
        let f = d.as_err_fun();
        let x = SemValue::Real(0.3);
        let mut prev = 0.0;
        for a in [0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0] {
            let out = f.apply(&x, &QuantaleValue::scalar(a)).as_scalar();
            assert!(out + 1e-12 >= prev, "derivative must grow with the radius");
            prev = out;
        }
    }

    #[test]
    fn fundamental_inequality_spot_check() {
        // |eval(t, env) - eval(t, env')| <= derive(t)(env, radii) on a couple
        // of handwritten admissible perturbations.
        let e = ectx();
        let ctx = TypingContext::new(vec![("x".into(), real())]).unwrap();
        let t = parse("sin(mul(x, x))", &e.prims).unwrap();
        for (x, a, y) in [(0.5, 0.2, 0.4), (1.0, 0.05, 1.05), (-1.0, 0.3, -0.8)] {
            let lhs = (eval(&e, &ctx, &t, &vec![SemValue::Real(x)]).as_real()
                - eval(&e, &ctx, &t, &vec![SemValue::Real(y)]).as_real())
            .abs();
            let bound = derive(
                &e,
                &ctx,
                &t,
                &vec![SemValue::Real(x)],
                &vec![QuantaleValue::scalar(a)],
            )
            .as_scalar();
            assert!(lhs <= bound + 1e-9, "at ({x},{a},{y}): {lhs} > {bound}");
        }
    }

    #[test]
    fn moduli_preflight() {
        let prims = PrimitiveTable::default_with_eps(0.1);
        let t = parse("\\x:Real. sin(x)", &prims).unwrap();
        assert!(check_moduli_available(&t, &prims).is_ok());
        let mut bare = PrimitiveTable::empty();
        bare.insert(Primitive::new("sq", 1, |xs| xs[0] * xs[0]));
        let t = parse("\\x:Real. sq(x)", &bare).unwrap();
        assert_eq!(
            check_moduli_available(&t, &bare),
            Err(ModulusError::Missing("sq".into()))
        );
    }
}
