//! Graded presentations of the decomposed ring, valid inside a degree window:
//! greedy generator extraction, relation search, relation parsing and
//! verification, and nilpotency reports.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::decomp::{DecompositionContext, RingElement};
use crate::error::{Error, Result};
use crate::linalg::{add_mod, mul_mod, neg_mod, reduce, EchelonSpan, FpMatrix};
use crate::cup::unit_class;
use crate::maps::restriction;
use crate::resolutions::CohomologyClass;

pub const DEFAULT_MAX_LENGTH: usize = 4;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub degree: i32,
    pub coords: Vec<u32>,
}

impl Generator {
    pub fn element(&self) -> RingElement {
        RingElement {
            degree: self.degree,
            coords: self.coords.clone(),
        }
    }
}

/// A polynomial in the generators: exponent vectors (in generator order) with coefficients.
pub type Polynomial = Vec<(Vec<u32>, u32)>;

#[derive(Clone, Debug, Serialize)]
pub struct Relation {
    pub text: String,
    pub degree: i32,
    #[serde(skip)]
    pub poly: Polynomial,
}

#[derive(Clone, Debug, Serialize)]
pub struct RingPresentation {
    pub p: u32,
    pub window: i32,
    pub max_length: usize,
    pub generators: Vec<Generator>,
    pub relations: Vec<Relation>,
    pub note: String,
}

impl RingPresentation {
    pub fn generator_degrees(&self) -> Vec<i32> {
        self.generators.iter().map(|g| g.degree).collect()
    }

    pub fn names(&self) -> HashMap<String, RingElement> {
        self.generators.iter().map(|g| (g.name.clone(), g.element())).collect()
    }

    /// Renames generators; names missing from the map are kept.
    pub fn rename(&mut self, map: &HashMap<String, String>) {
        for g in &mut self.generators {
            if let Some(n) = map.get(&g.name) {
                g.name = n.clone();
            }
        }
        for r in &mut self.relations {
            r.text = format_relation(&r.poly, &self.generators, self.p);
        }
    }
}

/// A graded algebra over `F_p` known degree by degree inside `[-window, window]`.
pub trait GradedAlgebra {
    fn p(&self) -> u32;
    fn window(&self) -> i32;
    fn dim(&self, n: i32) -> Result<usize>;
    fn one(&self) -> Result<RingElement>;
    fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement>;
}

impl GradedAlgebra for DecompositionContext {
    fn p(&self) -> u32 {
        DecompositionContext::p(self)
    }

    fn window(&self) -> i32 {
        DecompositionContext::window(self)
    }

    fn dim(&self, n: i32) -> Result<usize> {
        self.total_dim(n)
    }

    fn one(&self) -> Result<RingElement> {
        self.unit()
    }

    fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        self.multiply(a, b)
    }
}

/// The cohomology ring `Ĥ*(H_i, k)` of one stabilizer.
pub struct ComponentRing<'a> {
    ctx: &'a DecompositionContext,
    orbit: usize,
}

impl<'a> ComponentRing<'a> {
    pub fn new(ctx: &'a DecompositionContext, orbit: usize) -> Self {
        ComponentRing { ctx, orbit }
    }

    pub fn class(&self, x: &RingElement) -> Result<CohomologyClass> {
        self.ctx.component_class(self.orbit, x.degree, x.coords.clone())
    }
}

impl GradedAlgebra for ComponentRing<'_> {
    fn p(&self) -> u32 {
        self.ctx.p()
    }

    fn window(&self) -> i32 {
        self.ctx.window()
    }

    fn dim(&self, n: i32) -> Result<usize> {
        Ok(self.ctx.component_dims(n)?[self.orbit])
    }

    fn one(&self) -> Result<RingElement> {
        let c = unit_class(self.ctx.tate(), &self.ctx.stabilizers()[self.orbit], self.ctx.trivial(), 0)?;
        Ok(RingElement { degree: 0, coords: c.coords })
    }

    fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        let prod = self.ctx.cup_engine().cup(&self.class(a)?, &self.class(b)?, self.ctx.trivial_pairing())?;
        Ok(RingElement {
            degree: prod.degree(),
            coords: prod.coords,
        })
    }
}

/// Degree visiting order `0, 1, …, w, -1, …, -w`: the ordinary part first.
pub fn degree_order(window: i32) -> Vec<i32> {
    (0..=window).chain((1..=window).map(|d| -d)).collect()
}

fn in_window(n: i32, w: i32) -> bool {
    n.abs() <= w
}

fn unit_vec(len: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; len];
    v[i] = 1;
    v
}

/// Spans, per degree, of everything reachable from the unit by multiplying
/// by generators without leaving the window.
fn closure<A: GradedAlgebra + ?Sized>(ctx: &A, gens: &[RingElement]) -> Result<BTreeMap<i32, EchelonSpan>> {
    let w = ctx.window();
    let p = ctx.p();
    let mut spans = BTreeMap::new();
    for n in -w..=w {
        spans.insert(n, EchelonSpan::new(p, ctx.dim(n)?));
    }
    let mut queue = VecDeque::new();
    let one = ctx.one()?;
    if spans.get_mut(&0).expect("degree 0").insert(&one.coords) {
        queue.push_back(one);
    }
    while let Some(v) = queue.pop_front() {
        for g in gens {
            let n = v.degree + g.degree;
            if !in_window(n, w) {
                continue;
            }
            let prod = ctx.mul(&v, g)?;
            if spans.get_mut(&n).expect("in window").insert(&prod.coords) {
                queue.push_back(prod);
            }
        }
    }
    Ok(spans)
}

fn closure_is_full<A: GradedAlgebra + ?Sized>(ctx: &A, gens: &[RingElement]) -> Result<bool> {
    for (n, s) in closure(ctx, gens)? {
        if s.dim() != ctx.dim(n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn default_names(degrees: &[i32]) -> Vec<String> {
    let mut seen: HashMap<i32, usize> = HashMap::new();
    degrees
        .iter()
        .map(|&d| {
            let c = seen.entry(d).or_insert(0);
            *c += 1;
            match d.cmp(&0) {
                std::cmp::Ordering::Equal => format!("C{}", *c + 1),
                std::cmp::Ordering::Greater if *c == 1 => format!("u{d}"),
                std::cmp::Ordering::Greater => format!("u{d}_{c}"),
                std::cmp::Ordering::Less if *c == 1 => format!("v{}", -d),
                std::cmp::Ordering::Less => format!("v{}_{c}", -d),
            }
        })
        .collect()
}

/// Greedy generators in [`degree_order`], followed by a pass that drops
/// generators (latest first) that the others already produce.
pub fn select_generators<A: GradedAlgebra + ?Sized>(ctx: &A) -> Result<Vec<RingElement>> {
    let mut gens = fill_generators(ctx, Vec::new())?;
    let mut i = gens.len();
    while i > 0 {
        i -= 1;
        let mut trial = gens.clone();
        trial.remove(i);
        if closure_is_full(ctx, &trial)? {
            gens = trial;
        }
    }
    Ok(gens)
}

/// Generators following the decomposition: `ψ_1` of ring generators of
/// `Ĥ*(H, k)`; for every other orbit `ψ_i(1)` unless already generated, and
/// `ψ_i(g)` for ring generators `g` of `Ĥ*(H_i, k)` that are not restrictions
/// (a restriction `res α` gives `ψ_i(res α) = ψ_1(α) ψ_i(1)`). Degrees the
/// result does not reach are filled greedily.
pub fn structured_generators(ctx: &DecompositionContext) -> Result<Vec<RingElement>> {
    let mut gens = Vec::new();
    let whole = &ctx.stabilizers()[0];
    for i in 0..ctx.num_orbits() {
        let comp = ComponentRing::new(ctx, i);
        let one = comp.one()?;
        if one.is_zero() {
            continue;
        }
        let local = select_generators(&comp)?;
        if i == 0 {
            for g in &local {
                gens.push(ctx.embed(0, &comp.class(g)?)?);
            }
            continue;
        }
        let psi_one = ctx.embed(i, &comp.class(&one)?)?;
        if !closure(ctx, &gens)?[&0].contains(&psi_one.coords) {
            gens.push(psi_one);
        }
        for g in &local {
            let class = comp.class(g)?;
            let src = ctx.tate().space(whole, ctx.trivial(), g.degree)?;
            let cols = (0..src.dim())
                .map(|b| Ok(restriction(ctx.tate(), &src.basis_class(b), &ctx.stabilizers()[i])?.coords))
                .collect::<Result<Vec<_>>>()?;
            let res = FpMatrix::from_columns(ctx.p(), class.coords.len(), &cols);
            if res.solve(&class.coords).is_none() {
                gens.push(ctx.embed(i, &class)?);
            }
        }
    }
    fill_generators(ctx, gens)
}

/// Adds greedy generators until every degree of the window is reached.
fn fill_generators<A: GradedAlgebra + ?Sized>(ctx: &A, mut gens: Vec<RingElement>) -> Result<Vec<RingElement>> {
    for n in degree_order(ctx.window()) {
        let dim = ctx.dim(n)?;
        loop {
            let spans = closure(ctx, &gens)?;
            let span = &spans[&n];
            if span.dim() == dim {
                break;
            }
            let i = (0..dim)
                .find(|&i| !span.contains(&unit_vec(dim, i)))
                .ok_or_else(|| Error::Inconsistent("span is deficient but contains every basis vector".into()))?;
            gens.push(RingElement {
                degree: n,
                coords: unit_vec(dim, i),
            });
        }
    }
    Ok(gens)
}

/// Extraction with [`structured_generators`] and default names.
pub fn extract(ctx: &DecompositionContext, max_length: usize) -> Result<RingPresentation> {
    named_presentation(ctx, structured_generators(ctx)?, max_length)
}

/// Extraction with the plain greedy generating set of [`select_generators`].
pub fn extract_minimal<A: GradedAlgebra + ?Sized>(ctx: &A, max_length: usize) -> Result<RingPresentation> {
    named_presentation(ctx, select_generators(ctx)?, max_length)
}

fn named_presentation<A: GradedAlgebra + ?Sized>(ctx: &A, gens: Vec<RingElement>, max_length: usize) -> Result<RingPresentation> {
    let degrees: Vec<i32> = gens.iter().map(|g| g.degree).collect();
    let named = default_names(&degrees)
        .into_iter()
        .zip(gens)
        .map(|(name, g)| Generator {
            name,
            degree: g.degree,
            coords: g.coords,
        })
        .collect();
    presentation_for(ctx, named, max_length)
}

/// Sign of moving generator `g` from the front of sorted monomial `e` to its place.
fn koszul_left(degrees: &[i32], e: &[u32], g: usize) -> bool {
    let passed: i64 = (0..g).map(|h| e[h] as i64 * degrees[h] as i64).sum();
    (degrees[g] as i64 * passed).rem_euclid(2) == 1
}

fn monomial_degree(degrees: &[i32], e: &[u32]) -> i32 {
    e.iter().zip(degrees).map(|(&x, &d)| x as i32 * d).sum()
}

/// Relations among the given generators: checks that they generate every
/// degree of the window, then searches monomials of at most `max_length`
/// factors reachable inside the window and keeps kernel vectors not already
/// implied by earlier relations.
pub fn presentation_for<A: GradedAlgebra + ?Sized>(ctx: &A, generators: Vec<Generator>, max_length: usize) -> Result<RingPresentation> {
    let w = ctx.window();
    let p = ctx.p();
    let elems: Vec<RingElement> = generators.iter().map(Generator::element).collect();
    if !closure_is_full(ctx, &elems)? {
        return Err(Error::Invalid("the generators do not span every degree of the window".into()));
    }
    let ng = generators.len();
    let degrees: Vec<i32> = generators.iter().map(|g| g.degree).collect();

    // Monomials by BFS from 1, each evaluated as g · (smaller monomial).
    let mut values: HashMap<Vec<u32>, RingElement> = HashMap::new();
    let mut order: Vec<Vec<u32>> = Vec::new();
    let start = vec![0u32; ng];
    values.insert(start.clone(), ctx.one()?);
    order.push(start);
    let mut layer = vec![0usize];
    for _ in 0..max_length {
        let mut next = Vec::new();
        for &mi in &layer {
            let m = order[mi].clone();
            for g in 0..ng {
                let n = monomial_degree(&degrees, &m) + degrees[g];
                if !in_window(n, w) {
                    continue;
                }
                let mut e = m.clone();
                e[g] += 1;
                if values.contains_key(&e) {
                    continue;
                }
                let mut v = ctx.mul(&elems[g], &values[&m])?;
                if koszul_left(&degrees, &m, g) {
                    v.coords.iter_mut().for_each(|c| *c = neg_mod(*c, p));
                }
                values.insert(e.clone(), v);
                order.push(e);
                next.push(order.len() - 1);
            }
        }
        layer = next;
    }
    let length = |e: &Vec<u32>| e.iter().sum::<u32>();
    order.sort_by(|a, b| length(a).cmp(&length(b)).then_with(|| b.cmp(a)));

    let mut relations = Vec::new();
    let mut by_degree: BTreeMap<i32, Vec<&Vec<u32>>> = BTreeMap::new();
    for e in &order {
        by_degree.entry(monomial_degree(&degrees, e)).or_default().push(e);
    }
    let mut chosen: Vec<Polynomial> = Vec::new();
    for len in 0..=max_length as u32 {
        for (&n, monos) in &by_degree {
            let monos: Vec<&Vec<u32>> = monos.iter().copied().filter(|e| length(e) <= len).collect();
            if monos.is_empty() {
                continue;
            }
            let index: HashMap<&Vec<u32>, usize> = monos.iter().enumerate().map(|(i, e)| (*e, i)).collect();
            let dim = ctx.dim(n)?;
            let cols: Vec<Vec<u32>> = monos.iter().map(|e| values[*e].coords.clone()).collect();
            let eval = FpMatrix::from_columns(p, dim, &cols);
            let kernel = eval.kernel_basis();
            if kernel.is_empty() {
                continue;
            }
            // Consequences of relations chosen so far, as vectors over these monomials.
            let mut implied = EchelonSpan::new(p, monos.len());
            for poly in &chosen {
                for mult in multiples(poly, &degrees, &monos, p) {
                    let mut v = vec![0u32; monos.len()];
                    let mut ok = true;
                    for (e, c) in mult {
                        match index.get(&e) {
                            Some(&i) => v[i] = add_mod(v[i], c, p),
                            None => ok = false,
                        }
                    }
                    if ok {
                        implied.insert(&v);
                    }
                }
            }
            for k in kernel.iter().rev() {
                if implied.insert(k) {
                    let poly: Polynomial = k
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c != 0)
                        .map(|(i, &c)| (monos[i].clone(), c))
                        .collect();
                    chosen.push(poly.clone());
                    relations.push(Relation {
                        text: format_relation(&poly, &generators, p),
                        degree: n,
                        poly,
                    });
                }
            }
        }
    }
    Ok(RingPresentation {
        p,
        window: w,
        max_length,
        generators,
        relations,
        note: format!(
            "valid for degrees in [-{w}, {w}] and monomials of at most {max_length} factors reachable inside that range"
        ),
    })
}

/// All formal multiples `u · poly` whose terms are among `monos`.
fn multiples(poly: &Polynomial, degrees: &[i32], monos: &[&Vec<u32>], p: u32) -> Vec<Vec<(Vec<u32>, u32)>> {
    let Some((lead, _)) = poly.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for m in monos {
        if m.iter().zip(lead).any(|(a, b)| a < b) {
            continue;
        }
        let u: Vec<u32> = m.iter().zip(lead).map(|(a, b)| a - b).collect();
        let mut terms = Vec::new();
        for (e, c) in poly {
            // u·e in normal form: move each factor of u into place.
            let mut cur = e.clone();
            let mut neg = false;
            for g in (0..u.len()).rev() {
                for _ in 0..u[g] {
                    neg ^= koszul_left(degrees, &cur, g);
                    cur[g] += 1;
                }
            }
            terms.push((cur, if neg { neg_mod(*c, p) } else { *c }));
        }
        out.push(terms);
    }
    out
}

fn signed(c: u32, p: u32) -> (bool, u32) {
    if c > p / 2 {
        (true, p - c)
    } else {
        (false, c)
    }
}

fn format_monomial(e: &[u32], gens: &[Generator]) -> String {
    let mut parts = Vec::new();
    for (g, &x) in e.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let name = &gens[g].name;
        parts.push(match (name.strip_suffix("^-1"), x) {
            (_, 1) => name.clone(),
            (Some(base), _) => format!("{base}^-{x}"),
            (None, _) => format!("{name}^{x}"),
        });
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn format_polynomial(poly: &Polynomial, gens: &[Generator], p: u32) -> String {
    let mut out = String::new();
    for (i, (e, c)) in poly.iter().enumerate() {
        let (neg, mag) = signed(*c, p);
        let mono = format_monomial(e, gens);
        let body = match (mag, mono.as_str()) {
            (1, _) => mono.clone(),
            (_, "1") => mag.to_string(),
            _ => format!("{mag}*{mono}"),
        };
        match (i, neg) {
            (0, false) => out.push_str(&body),
            (0, true) => write!(out, "-{body}").expect("string write"),
            (_, false) => write!(out, " + {body}").expect("string write"),
            (_, true) => write!(out, " - {body}").expect("string write"),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn format_relation(poly: &Polynomial, gens: &[Generator], p: u32) -> String {
    format!("{} = 0", format_polynomial(poly, gens, p))
}

// ---------------------------------------------------------------------------
// Parsing and evaluating relations.

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(i64),
    Name(String),
    Sum(Vec<(bool, Expr)>),
    Product(Vec<Expr>),
    Power(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| Error::Parse(format!("bad number {text}")))?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*^()=".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        let mut neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        loop {
            terms.push((neg, self.product()?));
            if self.eat('+') {
                neg = false;
            } else if self.eat('-') {
                neg = true;
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 && !terms[0].0 {
            terms.pop().expect("one term").1
        } else {
            Expr::Sum(terms)
        })
    }

    fn product(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        while self.eat('*') {
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            Expr::Product(factors)
        })
    }

    fn exponent(&mut self) -> Result<i64> {
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Num(k)) => {
                self.pos += 1;
                Ok(if neg { -k } else { k })
            }
            other => Err(Error::Parse(format!("expected an exponent, found {other:?}"))),
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut base = match self.peek().cloned() {
            Some(Tok::Num(k)) => {
                self.pos += 1;
                Expr::Num(k)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Op('^')) && self.toks.get(self.pos + 1) == Some(&Tok::Op('-')) {
                    self.pos += 1;
                    let k = -self.exponent()?;
                    let inv = Expr::Name(format!("{name}^-1"));
                    if k == 1 {
                        inv
                    } else {
                        Expr::Power(Box::new(inv), k as u32)
                    }
                } else {
                    Expr::Name(name)
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                e
            }
            other => return Err(Error::Parse(format!("unexpected token {other:?}"))),
        };
        while self.eat('^') {
            let k = self.exponent()?;
            if k < 0 {
                return Err(Error::Parse("negative exponents apply only to generator names".into()));
            }
            base = Expr::Power(Box::new(base), k as u32);
        }
        Ok(base)
    }
}

/// Parses `lhs = rhs` (or a bare polynomial, read as `= 0`) into `lhs - rhs`.
/// `name^-k` stands for the generator `name^-1` raised to `k`.
pub fn parse_relation(s: &str) -> Result<Expr> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty relation".into()));
    }
    let mut parser = Parser { toks, pos: 0 };
    let lhs = parser.sum()?;
    let expr = if parser.eat('=') {
        let rhs = parser.sum()?;
        Expr::Sum(vec![(false, lhs), (true, rhs)])
    } else {
        lhs
    };
    if parser.pos != parser.toks.len() {
        return Err(Error::Parse(format!("trailing input in {s:?}")));
    }
    Ok(expr)
}

/// Reads a relation file: one relation per line, `#` starts a comment.
pub fn parse_relation_file(text: &str) -> Result<Vec<(String, Expr)>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| Ok((l.to_string(), parse_relation(l)?)))
        .collect()
}

/// An inhomogeneous element: homogeneous components keyed by degree.
pub type Graded = BTreeMap<i32, Vec<u32>>;

fn graded_add(a: &mut Graded, b: &Graded, neg: bool, p: u32) {
    for (n, v) in b {
        let entry = a.entry(*n).or_insert_with(|| vec![0; v.len()]);
        for (x, &y) in entry.iter_mut().zip(v) {
            *x = add_mod(*x, if neg { neg_mod(y, p) } else { y }, p);
        }
    }
}

/// Evaluates an expression with the decomposed product. Products are taken in
/// an order that keeps partial degrees inside the window, with Koszul signs.
pub fn evaluate<A: GradedAlgebra + ?Sized>(ctx: &A, names: &HashMap<String, RingElement>, e: &Expr) -> Result<Graded> {
    let p = ctx.p();
    Ok(match e {
        Expr::Num(k) => {
            let mut one = ctx.one()?;
            let c = reduce(*k, p);
            one.coords.iter_mut().for_each(|x| *x = mul_mod(*x, c, p));
            BTreeMap::from([(0, one.coords)])
        }
        Expr::Name(n) => {
            let el = names.get(n).ok_or_else(|| Error::Parse(format!("unknown generator {n}")))?;
            BTreeMap::from([(el.degree, el.coords.clone())])
        }
        Expr::Sum(terms) => {
            let mut acc = Graded::new();
            for (neg, t) in terms {
                graded_add(&mut acc, &evaluate(ctx, names, t)?, *neg, p);
            }
            acc
        }
        Expr::Product(_) | Expr::Power(..) => {
            let mut leaves = Vec::new();
            factor_leaves(e, &mut leaves);
            let vals = leaves.iter().map(|f| evaluate(ctx, names, f)).collect::<Result<Vec<_>>>()?;
            product_of(ctx, &vals)?
        }
    })
}

fn factor_leaves<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Product(fs) => fs.iter().for_each(|f| factor_leaves(f, out)),
        Expr::Power(b, k) => (0..*k).for_each(|_| factor_leaves(b, out)),
        _ => out.push(e),
    }
}

fn product_of<A: GradedAlgebra + ?Sized>(ctx: &A, vals: &[Graded]) -> Result<Graded> {
    let p = ctx.p();
    if vals.is_empty() {
        return Ok(BTreeMap::from([(0, ctx.one()?.coords)]));
    }
    let mut acc = Graded::new();
    let mut choice: Vec<(i32, &Vec<u32>)> = Vec::new();
    expand_choices(vals, 0, &mut choice, &mut |factors| {
        let el = ordered_product(ctx, factors)?;
        graded_add(&mut acc, &BTreeMap::from([(el.degree, el.coords)]), false, p);
        Ok(())
    })?;
    Ok(acc)
}

type Factor<'a> = (i32, &'a Vec<u32>);

fn expand_choices<'a>(
    vals: &'a [Graded],
    i: usize,
    choice: &mut Vec<(i32, &'a Vec<u32>)>,
    f: &mut dyn FnMut(&[Factor<'a>]) -> Result<()>,
) -> Result<()> {
    if i == vals.len() {
        return f(choice);
    }
    for (n, v) in &vals[i] {
        choice.push((*n, v));
        expand_choices(vals, i + 1, choice, f)?;
        choice.pop();
    }
    Ok(())
}

fn ordered_product<A: GradedAlgebra + ?Sized>(ctx: &A, factors: &[(i32, &Vec<u32>)]) -> Result<RingElement> {
    let w = ctx.window();
    let p = ctx.p();
    let total: i32 = factors.iter().map(|f| f.0).sum();
    if !in_window(total, w) {
        return Err(Error::Window {
            degree: total,
            lo: -w,
            hi: w,
        });
    }
    let mut remaining: Vec<usize> = (0..factors.len()).collect();
    let mut picked = Vec::new();
    let mut cur = 0i32;
    while !remaining.is_empty() {
        let pos = remaining
            .iter()
            .position(|&i| in_window(cur + factors[i].0, w))
            .ok_or_else(|| Error::Window {
                degree: cur + factors[remaining[0]].0,
                lo: -w,
                hi: w,
            })?;
        let i = remaining.remove(pos);
        cur += factors[i].0;
        picked.push(i);
    }
    // Koszul sign of the reordering.
    let mut neg = false;
    for a in 0..picked.len() {
        for b in a + 1..picked.len() {
            if picked[a] > picked[b] && factors[picked[a]].0 % 2 != 0 && factors[picked[b]].0 % 2 != 0 {
                neg = !neg;
            }
        }
    }
    let mut acc = ctx.one()?;
    for &i in &picked {
        let f = RingElement {
            degree: factors[i].0,
            coords: factors[i].1.clone(),
        };
        acc = ctx.mul(&acc, &f)?;
    }
    if neg {
        acc.coords.iter_mut().for_each(|c| *c = neg_mod(*c, p));
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationVerdict {
    pub relation: String,
    pub passed: bool,
    /// Nonzero homogeneous components of `lhs - rhs`.
    pub witness: Vec<(i32, Vec<u32>)>,
    pub error: Option<String>,
}

pub fn verify_relation<A: GradedAlgebra + ?Sized>(ctx: &A, names: &HashMap<String, RingElement>, text: &str, e: &Expr) -> RelationVerdict {
    match evaluate(ctx, names, e) {
        Ok(v) => {
            let witness: Vec<(i32, Vec<u32>)> = v.into_iter().filter(|(_, c)| c.iter().any(|&x| x != 0)).collect();
            RelationVerdict {
                relation: text.to_string(),
                passed: witness.is_empty(),
                witness,
                error: None,
            }
        }
        Err(err) => RelationVerdict {
            relation: text.to_string(),
            passed: false,
            witness: Vec::new(),
            error: Some(err.to_string()),
        },
    }
}

/// Parses and checks each relation; unknown generator names are an error.
pub fn verify_relations<A: GradedAlgebra + ?Sized>(ctx: &A, names: &HashMap<String, RingElement>, relations: &[&str]) -> Result<Vec<RelationVerdict>> {
    let mut out = Vec::new();
    for r in relations {
        let e = parse_relation(r)?;
        check_names(&e, names)?;
        out.push(verify_relation(ctx, names, r, &e));
    }
    Ok(out)
}

fn check_names(e: &Expr, names: &HashMap<String, RingElement>) -> Result<()> {
    match e {
        Expr::Num(_) => Ok(()),
        Expr::Name(n) if names.contains_key(n) => Ok(()),
        Expr::Name(n) => Err(Error::Parse(format!("unknown generator {n}"))),
        Expr::Sum(ts) => ts.iter().try_for_each(|(_, t)| check_names(t, names)),
        Expr::Product(fs) => fs.iter().try_for_each(|f| check_names(f, names)),
        Expr::Power(b, _) => check_names(b, names),
    }
}

/// Checks the presentation's own relations.
pub fn verify_presentation<A: GradedAlgebra + ?Sized>(ctx: &A, pres: &RingPresentation) -> Result<Vec<RelationVerdict>> {
    let texts: Vec<&str> = pres.relations.iter().map(|r| r.text.as_str()).collect();
    verify_relations(ctx, &pres.names(), &texts)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RadicalStatus {
    Nilpotent(u32),
    Unit,
    NotNilpotentInWindow,
}

#[derive(Clone, Debug, Serialize)]
pub struct RadicalEntry {
    pub generator: String,
    pub degree: i32,
    pub status: RadicalStatus,
}

/// Smallest vanishing power of each generator inside the window, or whether it is a unit.
pub fn radical_report<A: GradedAlgebra + ?Sized>(ctx: &A, pres: &RingPresentation) -> Result<Vec<RadicalEntry>> {
    let w = ctx.window();
    let one = ctx.one()?;
    let mut out = Vec::new();
    for g in &pres.generators {
        let x = g.element();
        let mut status = RadicalStatus::NotNilpotentInWindow;
        if x.is_zero() {
            status = RadicalStatus::Nilpotent(1);
        } else {
            let cap = if x.degree == 0 { ctx.dim(0)? as u32 + 1 } else { u32::MAX };
            let mut power = x.clone();
            let mut k = 1u32;
            while k < cap && in_window(power.degree + x.degree, w) {
                power = ctx.mul(&power, &x)?;
                k += 1;
                if power.is_zero() {
                    status = RadicalStatus::Nilpotent(k);
                    break;
                }
            }
            if status == RadicalStatus::NotNilpotentInWindow && in_window(-x.degree, w) && !one.is_zero() {
                let dim = ctx.dim(-x.degree)?;
                let cols = (0..dim)
                    .map(|b| Ok(ctx.mul(&x, &RingElement { degree: -x.degree, coords: unit_vec(dim, b) })?.coords))
                    .collect::<Result<Vec<_>>>()?;
                let m = FpMatrix::from_columns(ctx.p(), one.coords.len(), &cols);
                if m.solve(&one.coords).is_some() {
                    status = RadicalStatus::Unit;
                }
            }
        }
        out.push(RadicalEntry {
            generator: g.name.clone(),
            degree: g.degree,
            status,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The symmetric group on three letters in characteristic 3.

/// The relations of the S₃ ring in characteristic 3 in generator-name syntax.
pub const S3_RELATIONS: &[&str] = &[
    "x*W1 = 0",
    "x*W2 = z*W1",
    "z^-1*W1 = (x*z^-1)*W2^-1",
    "C^2 = 0",
    "C*W1 = 0",
    "C*W2 = 0",
    "C*W2^-1 = 0",
    "W2^2 = z*C",
    "W2^-2 = z^-1*C",
    "W1*W2 = x*C",
    "W1*W2^-1 = x*z^-1*C",
];

/// Further identities checked by the demo: the class sum relation and nilpotency.
pub const S3_EXTRA_RELATIONS: &[&str] = &["E2^2 = E2 - 1", "W1^2 = 0", "W2^3 = 0", "W2^-3 = 0", "z*z^-1 = 1", "W2*W2^-1 = C"];

/// Named elements `x, z, z^-1, C, E2, W1, W2, W2^-1` of the S₃ ring.
///
/// `w1, w2` are the basis classes of the degree 1 and 2 cohomology of the
/// rotation subgroup `N`, `w2^-1` is the inverse of `w2`, and `x, z, z^-1`
/// are the classes of the whole group restricting to `w1 w2`, `w2^2`, `w2^-2`.
pub fn s3_named_elements(ctx: &DecompositionContext) -> Result<HashMap<String, RingElement>> {
    let group = ctx.acting_group();
    if group.order() != 6 || group.is_abelian() || ctx.p() != 3 || ctx.window() < 4 {
        return Err(Error::Invalid("the named elements need S3 in characteristic 3 with window at least 4".into()));
    }
    let stabs = ctx.stabilizers();
    let i2 = stabs
        .iter()
        .position(|s| s.order() == 3)
        .ok_or_else(|| Error::Inconsistent("no orbit with stabilizer of order 3".into()))?;
    let n_sub = &stabs[i2];
    let whole = &stabs[0];
    let tate = ctx.tate();
    let k = ctx.trivial();
    let cup = ctx.cup_engine();
    let kk = ctx.trivial_pairing();
    let basis = |n: i32| -> Result<crate::resolutions::CohomologyClass> {
        let sp = tate.space(n_sub, k, n)?;
        if sp.dim() != 1 {
            return Err(Error::Inconsistent(format!("expected one class in degree {n}")));
        }
        Ok(sp.basis_class(0))
    };
    let w1 = basis(1)?;
    let w2 = basis(2)?;
    let one_n = cup.unit(n_sub, k)?;
    let candidate = basis(-2)?;
    let prod = cup.cup(&w2, &candidate, kk)?;
    let c = prod.coords[0];
    if c == 0 || one_n.coords[0] == 0 {
        return Err(Error::Inconsistent("w2 is not invertible".into()));
    }
    let scale = mul_mod(one_n.coords[0], crate::linalg::inv_mod(c, ctx.p()), ctx.p());
    let w2inv = candidate.scale(scale);
    let w1w2 = cup.cup(&w1, &w2, kk)?;
    let w2sq = cup.cup(&w2, &w2, kk)?;
    let w2m2 = cup.cup(&w2inv, &w2inv, kk)?;
    let preimage = |target: &crate::resolutions::CohomologyClass| -> Result<crate::resolutions::CohomologyClass> {
        let n = target.degree();
        let sp = tate.space(whole, k, n)?;
        let cols = (0..sp.dim())
            .map(|i| Ok(restriction(tate, &sp.basis_class(i), n_sub)?.coords))
            .collect::<Result<Vec<_>>>()?;
        let m = FpMatrix::from_columns(ctx.p(), target.coords.len(), &cols);
        let x = m
            .solve(&target.coords)
            .ok_or_else(|| Error::Inconsistent(format!("degree {n} class is not a restriction")))?;
        Ok(sp.class(x))
    };
    let x = preimage(&w1w2)?;
    let z = preimage(&w2sq)?;
    let zinv = preimage(&w2m2)?;
    let e2 = ctx.embed(i2, &one_n)?;
    let unit = ctx.unit()?;
    let cc = RingElement {
        degree: 0,
        coords: e2.coords.iter().zip(&unit.coords).map(|(&a, &b)| add_mod(a, b, ctx.p())).collect(),
    };
    Ok(HashMap::from([
        ("x".to_string(), ctx.embed(0, &x)?),
        ("z".to_string(), ctx.embed(0, &z)?),
        ("z^-1".to_string(), ctx.embed(0, &zinv)?),
        ("C".to_string(), cc),
        ("E2".to_string(), e2),
        ("W1".to_string(), ctx.embed(i2, &w1)?),
        ("W2".to_string(), ctx.embed(i2, &w2)?),
        ("W2^-1".to_string(), ctx.embed(i2, &w2inv)?),
    ]))
}

/// The S₃ generators in the order used by the presentation.
pub const S3_GENERATOR_NAMES: &[&str] = &["C", "W1", "W2", "W2^-1", "x", "z", "z^-1"];

pub fn s3_generators(named: &HashMap<String, RingElement>) -> Vec<Generator> {
    S3_GENERATOR_NAMES
        .iter()
        .map(|n| {
            let e = &named[*n];
            Generator {
                name: n.to_string(),
                degree: e.degree,
                coords: e.coords.clone(),
            }
        })
        .collect()
}

/// Maps default names to the S₃ names by degree, when the degrees match.
pub fn s3_name_map(pres: &RingPresentation) -> Option<HashMap<String, String>> {
    let by_degree = [(0, "C"), (1, "W1"), (2, "W2"), (-2, "W2^-1"), (3, "x"), (4, "z"), (-4, "z^-1")];
    let mut degrees = pres.generator_degrees();
    degrees.sort_unstable();
    let mut expect: Vec<i32> = by_degree.iter().map(|t| t.0).collect();
    expect.sort_unstable();
    if degrees != expect {
        return None;
    }
    Some(
        pres.generators
            .iter()
            .map(|g| {
                let name = by_degree.iter().find(|t| t.0 == g.degree).expect("degree present").1;
                (g.name.clone(), name.to_string())
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cyclic, symmetric3};
    use crate::resolutions::SizeBudget;
    use std::sync::Arc;

    #[test]
    fn parser_shapes() {
        assert_eq!(parse_relation("x").unwrap(), Expr::Name("x".into()));
        assert_eq!(
            parse_relation("W2^-2").unwrap(),
            Expr::Power(Box::new(Expr::Name("W2^-1".into())), 2)
        );
        assert_eq!(parse_relation("z^-1").unwrap(), Expr::Name("z^-1".into()));
        let e = parse_relation("W2^2 = z*C").unwrap();
        match e {
            Expr::Sum(t) => {
                assert_eq!(t.len(), 2);
                assert!(t[1].0);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_relation("x +").is_err());
        assert!(parse_relation("(x").is_err());
        assert!(parse_relation("(x)^-2").is_err());
        assert!(parse_relation("x $ y").is_err());
        assert_eq!(parse_relation_file("# c\nx\n\n y = 0 # t\n").unwrap().len(), 2);
    }

    #[test]
    fn cyclic_three_presentation() {
        let c3 = Arc::new(cyclic(3));
        let ctx = DecompositionContext::for_group(&c3, 3, 3, None, &SizeBudget::default()).unwrap();
        let pres = extract(&ctx, 3).unwrap();
        let mut d = pres.generator_degrees();
        d.sort_unstable();
        assert_eq!(d, vec![-2, 0, 1, 2]);
        for v in verify_presentation(&ctx, &pres).unwrap() {
            assert!(v.passed, "{v:?}");
        }
        let rad = radical_report(&ctx, &pres).unwrap();
        let two = rad.iter().find(|r| r.degree == 2).unwrap();
        assert_eq!(two.status, RadicalStatus::Unit);
        let one = rad.iter().find(|r| r.degree == 1).unwrap();
        assert_eq!(one.status, RadicalStatus::Nilpotent(2));
    }

    #[test]
    fn coprime_is_zero_ring() {
        let c2 = Arc::new(cyclic(2));
        let ctx = DecompositionContext::for_group(&c2, 3, 2, None, &SizeBudget::default()).unwrap();
        let pres = extract(&ctx, 2).unwrap();
        assert!(pres.generators.is_empty());
        assert_eq!(pres.relations.len(), 1);
        assert_eq!(pres.relations[0].text, "1 = 0");
    }

    #[test]
    fn s3_named_relations() {
        let s3 = Arc::new(symmetric3());
        let ctx = DecompositionContext::for_group(&s3, 3, 6, None, &SizeBudget::default()).unwrap();
        let named = s3_named_elements(&ctx).unwrap();
        for v in verify_relations(&ctx, &named, S3_RELATIONS).unwrap() {
            assert!(v.passed, "{v:?}");
        }
        for v in verify_relations(&ctx, &named, S3_EXTRA_RELATIONS).unwrap() {
            assert!(v.passed, "{v:?}");
        }
        let wrong = verify_relations(&ctx, &named, &["W2^2 - x*C"]).unwrap();
        assert!(!wrong[0].passed);
        assert!(!wrong[0].witness.is_empty());
        assert!(verify_relations(&ctx, &named, &["q*x"]).is_err());
    }

    #[test]
    fn s3_structured_extraction() {
        let s3 = Arc::new(symmetric3());
        let ctx = DecompositionContext::for_group(&s3, 3, 6, None, &SizeBudget::default()).unwrap();
        let mut pres = extract(&ctx, DEFAULT_MAX_LENGTH).unwrap();
        assert_eq!(pres.generator_degrees(), [3, 4, -4, 0, 1, 2, -2]);
        assert!(verify_presentation(&ctx, &pres).unwrap().iter().all(|v| v.passed));
        let map = s3_name_map(&pres).unwrap();
        pres.rename(&map);
        let names: Vec<&str> = pres.generators.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["x", "z", "z^-1", "C", "W1", "W2", "W2^-1"]);
        assert!(verify_presentation(&ctx, &pres).unwrap().iter().all(|v| v.passed));
        let minimal = extract_minimal(&ctx, DEFAULT_MAX_LENGTH).unwrap();
        assert!(minimal.generators.len() < pres.generators.len());
        assert!(verify_presentation(&ctx, &minimal).unwrap().iter().all(|v| v.passed));
    }
}
