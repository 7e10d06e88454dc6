//! The line-oriented workspace format.
//!
//! ```text
//! language L
//!   relation R 2
//! end
//! structure A : L size 2
//!   R (0, 1)
//! end
//! fragment K : L
//!   member A
//!   structure B size 1
//!   end
//!   strong B < A (0)
//!   reflexive
//! end
//! ```
//!
//! Blocks refer only to names declared earlier in the file. Every line holds
//! one item, `#` starts a comment, and blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::construct::PullbackConfig;
use crate::fragment::{AecFragment, StrongPair};
use crate::generate::{random_config, Profile};
use crate::lang::{Language, LanguageMorphism, SymbolKind};
use crate::structure::{tuples_over, Embedding, FinStructure};
use crate::theory::{check_morphism, connection_partition, ClosedTheory};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DslError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Parse { line: usize, column: usize, expected: Vec<String>, found: String },
    #[error("{line}: unresolved {what} `{name}`")]
    UnresolvedReference { line: usize, what: String, name: String },
    #[error("{line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("fragment `{fragment}` fails {}", failed.join(", "))]
    ValidationFailure { fragment: String, failed: Vec<String> },
}

pub type DslResult<T> = std::result::Result<T, DslError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismDecl {
    pub source: String,
    pub target: String,
    pub morphism: LanguageMorphism,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureDecl {
    pub lang: String,
    pub structure: FinStructure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentDecl {
    pub lang: String,
    pub fragment: Arc<AecFragment>,
}

/// A span `left --left_along--> base <--right_along-- right` of reducts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigDecl {
    pub base: String,
    pub left: String,
    pub left_along: String,
    pub right: String,
    pub right_along: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryDecl {
    pub fragment: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Workspace {
    pub languages: BTreeMap<String, Language>,
    pub morphisms: BTreeMap<String, MorphismDecl>,
    pub structures: BTreeMap<String, StructureDecl>,
    pub fragments: BTreeMap<String, FragmentDecl>,
    pub configs: BTreeMap<String, ConfigDecl>,
    pub theories: BTreeMap<String, TheoryDecl>,
}

impl Workspace {
    pub fn fragment(&self, name: &str) -> DslResult<&Arc<AecFragment>> {
        self.fragments.get(name).map(|f| &f.fragment).ok_or_else(|| unresolved(0, "fragment", name))
    }

    pub fn structure(&self, name: &str) -> DslResult<&FinStructure> {
        self.structures.get(name).map(|s| &s.structure).ok_or_else(|| unresolved(0, "structure", name))
    }

    /// The span named `name`, with both legs checked as AEC morphisms.
    pub fn config(&self, name: &str) -> crate::Result<PullbackConfig> {
        let c = self
            .configs
            .get(name)
            .ok_or_else(|| crate::Error::NotAMember(format!("no config `{name}`")))?;
        let base = self.fragments[&c.base].fragment.clone();
        let leg = |frag: &str, along: &str| {
            let alpha = &self.morphisms[along].morphism;
            check_morphism(alpha, &self.fragments[frag].fragment, &base)
                .map_err(|e| crate::Error::InvalidMorphism(format!("`{along}` from `{frag}` to `{}`: {e:?}", c.base)))
        };
        PullbackConfig::new(leg(&c.left, &c.left_along)?, leg(&c.right, &c.right_along)?)
    }

    pub fn theory(&self, name: &str) -> DslResult<(String, ClosedTheory)> {
        let t = self.theories.get(name).ok_or_else(|| unresolved(0, "theory", name))?;
        let f = self.fragment(&t.fragment)?;
        let idx: Vec<usize> = t.members.iter().map(|m| f.index_of(m).expect("checked on load")).collect();
        Ok((t.fragment.clone(), ClosedTheory::generated_by(&connection_partition(f), idx)))
    }
}

fn unresolved(line: usize, what: &str, name: &str) -> DslError {
    DslError::UnresolvedReference { line, what: what.into(), name: name.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    Punct(&'static str),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Punct(p) => format!("`{p}`"),
        }
    }
}

const PUNCT: [&str; 7] = ["->", ":", "<", "(", ")", ",", "="];

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

fn lex_line(line_no: usize, text: &str) -> DslResult<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if let Some(p) = PUNCT.iter().find(|p| chars[i..].iter().take(p.len()).copied().eq(p.chars())) {
            out.push((col, Tok::Punct(p)));
            i += p.len();
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse().map_err(|_| DslError::Parse {
                line: line_no,
                column: col,
                expected: vec!["a number".into()],
                found: digits.clone(),
            })?;
            out.push((col, Tok::Num(n)));
            continue;
        }
        if is_ident_char(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
            continue;
        }
        return Err(DslError::Parse {
            line: line_no,
            column: col,
            expected: vec!["a name".into(), "a number".into(), "punctuation".into()],
            found: format!("`{c}`"),
        });
    }
    Ok(out)
}

/// Cursor over one line's tokens.
struct Line {
    no: usize,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
}

impl Line {
    fn err(&self, expected: &[&str]) -> DslError {
        let (column, found) = match self.toks.get(self.pos) {
            Some((c, t)) => (*c, t.describe()),
            None => (self.end_col, "end of line".into()),
        };
        DslError::Parse { line: self.no, column, expected: expected.iter().map(|s| s.to_string()).collect(), found }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn ident(&mut self) -> DslResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(&["a name"])),
        }
    }

    fn keyword(&mut self, kw: &str) -> DslResult<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(&[&format!("`{kw}`")])),
        }
    }

    fn num(&mut self) -> DslResult<usize> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err(&["a number"])),
        }
    }

    fn punct(&mut self, p: &str) -> DslResult<()> {
        match self.peek() {
            Some(Tok::Punct(q)) if *q == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(&[&format!("`{p}`")])),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    /// `( n, n, ... )`, possibly empty.
    fn tuple(&mut self) -> DslResult<Vec<usize>> {
        self.punct("(")?;
        let mut out = Vec::new();
        if self.is_punct(")") {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.num()?);
            if self.is_punct(",") {
                self.pos += 1;
            } else {
                self.punct(")")?;
                return Ok(out);
            }
        }
    }

    fn finish(&self) -> DslResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err(&["end of line"]))
        }
    }
}

struct Parser {
    lines: Vec<Line>,
    next: usize,
    ws: Workspace,
}

const TOP_LEVEL: [&str; 6] = ["`language`", "`morphism`", "`structure`", "`fragment`", "`config`", "`theory`"];

pub fn parse(text: &str) -> DslResult<Workspace> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let toks = lex_line(i + 1, raw)?;
        if !toks.is_empty() {
            lines.push(Line { no: i + 1, toks, pos: 0, end_col: raw.chars().count() + 1 });
        }
    }
    let mut p = Parser { lines, next: 0, ws: Workspace::default() };
    while p.next < p.lines.len() {
        p.item()?;
    }
    Ok(p.ws)
}

/// Parses and validates every fragment unless `allow_invalid`.
pub fn load(text: &str, allow_invalid: bool) -> DslResult<Workspace> {
    let ws = parse(text)?;
    if !allow_invalid {
        for (name, f) in &ws.fragments {
            let report = f.fragment.validate();
            if !report.all_pass {
                return Err(DslError::ValidationFailure {
                    fragment: name.clone(),
                    failed: report.failed_axioms().into_iter().map(String::from).collect(),
                });
            }
        }
    }
    Ok(ws)
}

fn semantic(line: usize, e: impl std::fmt::Display) -> DslError {
    DslError::Semantic { line, message: e.to_string() }
}

impl Parser {
    fn line(&mut self) -> &mut Line {
        &mut self.lines[self.next]
    }

    fn eof_error(&self, expected: &[&str]) -> DslError {
        let line = self.lines.last().map(|l| l.no).unwrap_or(0);
        DslError::Parse {
            line,
            column: self.lines.last().map(|l| l.end_col).unwrap_or(1),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: "end of file".into(),
        }
    }

    /// Moves to the next body line; `None` once `end` is consumed.
    fn body_line(&mut self) -> DslResult<Option<usize>> {
        self.next += 1;
        if self.next >= self.lines.len() {
            return Err(self.eof_error(&["`end`"]));
        }
        let l = &mut self.lines[self.next];
        if matches!(&l.toks[0].1, Tok::Ident(s) if s == "end") {
            l.pos = 1;
            l.finish()?;
            self.next += 1;
            return Ok(None);
        }
        Ok(Some(self.next))
    }

    fn fresh(&self, line: usize, kind: &str, name: &str, taken: bool) -> DslResult<()> {
        if taken {
            Err(semantic(line, format!("{kind} `{name}` is declared twice")))
        } else {
            Ok(())
        }
    }

    fn language_ref(&self, line: usize, name: &str) -> DslResult<Language> {
        self.ws.languages.get(name).cloned().ok_or_else(|| unresolved(line, "language", name))
    }

    fn item(&mut self) -> DslResult<()> {
        let kw = match self.line().peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(self.line().err(&TOP_LEVEL)),
        };
        self.line().pos += 1;
        match kw.as_str() {
            "language" => self.language(),
            "morphism" => self.morphism(),
            "structure" => self.top_structure(),
            "fragment" => self.fragment(),
            "config" => self.config(),
            "theory" => self.theory(),
            _ => {
                self.line().pos -= 1;
                Err(self.line().err(&TOP_LEVEL))
            }
        }
    }

    fn language(&mut self) -> DslResult<()> {
        let no = self.line().no;
        let name = self.line().ident()?;
        self.line().finish()?;
        self.fresh(no, "language", &name, self.ws.languages.contains_key(&name))?;
        let mut lang = Language::empty();
        while let Some(i) = self.body_line()? {
            let l = &mut self.lines[i];
            let kind = match l.peek() {
                Some(Tok::Ident(k)) if k == "relation" || k == "function" || k == "constant" => k.clone(),
                _ => return Err(l.err(&["`relation`", "`function`", "`constant`", "`end`"])),
            };
            l.pos += 1;
            let sym = l.ident()?;
            let kind = match kind.as_str() {
                "relation" => SymbolKind::Relation(l.num()?),
                "function" => SymbolKind::Function(l.num()?),
                _ => SymbolKind::Constant,
            };
            l.finish()?;
            lang.add(sym, kind).map_err(|e| semantic(l.no, e))?;
        }
        self.ws.languages.insert(name, lang);
        Ok(())
    }

    fn morphism(&mut self) -> DslResult<()> {
        let no = self.line().no;
        let l = self.line();
        let name = l.ident()?;
        l.punct(":")?;
        let source = l.ident()?;
        l.punct("->")?;
        let target = l.ident()?;
        l.finish()?;
        self.fresh(no, "morphism", &name, self.ws.morphisms.contains_key(&name))?;
        let (src, tgt) = (self.language_ref(no, &source)?, self.language_ref(no, &target)?);
        // unmapped symbols keep their name
        let mut map: BTreeMap<String, String> = src.symbols().map(|(s, _)| (s.to_string(), s.to_string())).collect();
        while let Some(i) = self.body_line()? {
            let l = &mut self.lines[i];
            let from = l.ident()?;
            l.punct("->")?;
            let to = l.ident()?;
            l.finish()?;
            if src.kind(&from).is_none() {
                return Err(unresolved(l.no, "symbol", &from));
            }
            map.insert(from, to);
        }
        let morphism = LanguageMorphism::new(src, tgt, map).map_err(|e| semantic(no, e))?;
        self.ws.morphisms.insert(name, MorphismDecl { source, target, morphism });
        Ok(())
    }

    fn top_structure(&mut self) -> DslResult<()> {
        let no = self.line().no;
        let l = self.line();
        let name = l.ident()?;
        l.punct(":")?;
        let lang_name = l.ident()?;
        l.keyword("size")?;
        let size = l.num()?;
        l.finish()?;
        self.fresh(no, "structure", &name, self.ws.structures.contains_key(&name))?;
        let lang = Arc::new(self.language_ref(no, &lang_name)?);
        let structure = self.structure_body(no, lang, size)?;
        self.ws.structures.insert(name, StructureDecl { lang: lang_name, structure });
        Ok(())
    }

    /// Interpretation lines up to `end`. Each line starts with a symbol; its
    /// kind decides what follows.
    fn structure_body(&mut self, header: usize, lang: Arc<Language>, size: usize) -> DslResult<FinStructure> {
        let mut relations: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
        let mut functions: BTreeMap<String, BTreeMap<Vec<usize>, usize>> = BTreeMap::new();
        let mut constants = BTreeMap::new();
        while let Some(i) = self.body_line()? {
            let l = &mut self.lines[i];
            let sym = l.ident()?;
            match lang.kind(&sym) {
                None => return Err(unresolved(l.no, "symbol", &sym)),
                Some(SymbolKind::Relation(_)) => {
                    let entry = relations.entry(sym).or_default();
                    while !l.at_end() {
                        entry.insert(l.tuple()?);
                    }
                }
                Some(SymbolKind::Function(_)) => {
                    let graph = functions.entry(sym).or_default();
                    while !l.at_end() {
                        let args = l.tuple()?;
                        l.punct("->")?;
                        graph.insert(args, l.num()?);
                    }
                }
                Some(SymbolKind::Constant) => {
                    l.punct("=")?;
                    constants.insert(sym, l.num()?);
                    l.finish()?;
                }
            }
        }
        let elems: Vec<usize> = (0..size).collect();
        let mut tables = BTreeMap::new();
        for (f, graph) in functions {
            let arity = lang.functions()[&f];
            let table: Option<Vec<usize>> = tuples_over(&elems, arity).iter().map(|t| graph.get(t).copied()).collect();
            let table = table.ok_or_else(|| semantic(header, format!("the graph of `{f}` is not total")))?;
            if graph.len() != table.len() {
                return Err(semantic(header, format!("the graph of `{f}` has arguments outside the universe")));
            }
            tables.insert(f, table);
        }
        FinStructure::new(lang, size, relations, tables, constants).map_err(|e| semantic(header, e))
    }

    fn fragment(&mut self) -> DslResult<()> {
        let no = self.line().no;
        let l = self.line();
        let name = l.ident()?;
        l.punct(":")?;
        let lang_name = l.ident()?;
        l.finish()?;
        self.fresh(no, "fragment", &name, self.ws.fragments.contains_key(&name))?;
        let lang = Arc::new(self.language_ref(no, &lang_name)?);
        let mut names: Vec<String> = Vec::new();
        let mut structures: Vec<FinStructure> = Vec::new();
        let mut pairs: Vec<StrongPair> = Vec::new();
        let (mut reflexive, mut inclusions) = (false, false);
        while let Some(i) = self.body_line()? {
            let l = &mut self.lines[i];
            let line_no = l.no;
            let kw = match l.peek() {
                Some(Tok::Ident(k)) => k.clone(),
                _ => return Err(l.err(&["`member`", "`structure`", "`strong`", "`reflexive`", "`inclusions`", "`end`"])),
            };
            l.pos += 1;
            match kw.as_str() {
                "member" => {
                    let m = l.ident()?;
                    l.finish()?;
                    let s = self.ws.structures.get(&m).ok_or_else(|| unresolved(line_no, "structure", &m))?;
                    if names.contains(&m) {
                        return Err(semantic(line_no, format!("member `{m}` is listed twice")));
                    }
                    names.push(m);
                    structures.push(s.structure.clone());
                }
                "structure" => {
                    let m = l.ident()?;
                    l.keyword("size")?;
                    let size = l.num()?;
                    l.finish()?;
                    if names.contains(&m) {
                        return Err(semantic(line_no, format!("member `{m}` is listed twice")));
                    }
                    let s = self.structure_body(line_no, lang.clone(), size)?;
                    // structure_body consumed the inner `end`; step back so the
                    // outer loop sees the line after it
                    self.next -= 1;
                    names.push(m);
                    structures.push(s);
                }
                "strong" => {
                    let lower = l.ident()?;
                    l.punct("<")?;
                    let upper = l.ident()?;
                    let map = l.tuple()?;
                    l.finish()?;
                    let idx = |n: &str| names.iter().position(|x| x == n).ok_or_else(|| unresolved(line_no, "member", n));
                    pairs.push(StrongPair { lower: idx(&lower)?, upper: idx(&upper)?, inclusion: Embedding::new(map) });
                }
                "reflexive" => {
                    l.finish()?;
                    reflexive = true;
                }
                "inclusions" => {
                    l.finish()?;
                    inclusions = true;
                }
                _ => {
                    l.pos -= 1;
                    return Err(l.err(&["`member`", "`structure`", "`strong`", "`reflexive`", "`inclusions`", "`end`"]));
                }
            }
        }
        if inclusions {
            let all = AecFragment::from_strong_predicate(lang.clone(), structures.clone(), names.clone(), |_, _| true)
                .map_err(|e| semantic(no, e))?;
            pairs.extend(all.pairs().iter().cloned());
        } else if reflexive {
            pairs.extend(
                structures
                    .iter()
                    .enumerate()
                    .map(|(i, s)| StrongPair { lower: i, upper: i, inclusion: Embedding::identity(s.size()) }),
            );
        }
        let fragment = AecFragment::new(lang, structures, names, pairs).map_err(|e| semantic(no, e))?;
        self.ws.fragments.insert(name, FragmentDecl { lang: lang_name, fragment: Arc::new(fragment) });
        Ok(())
    }

    fn config(&mut self) -> DslResult<()> {
        let no = self.line().no;
        let name = self.line().ident()?;
        self.line().finish()?;
        self.fresh(no, "config", &name, self.ws.configs.contains_key(&name))?;
        let (mut base, mut left, mut right) = (None, None, None);
        while let Some(i) = self.body_line()? {
            let l = &mut self.lines[i];
            let kw = match l.peek() {
                Some(Tok::Ident(k)) if ["base", "left", "right"].contains(&k.as_str()) => k.clone(),
                _ => return Err(l.err(&["`base`", "`left`", "`right`", "`end`"])),
            };
            l.pos += 1;
            let frag = l.ident()?;
            if !self.ws.fragments.contains_key(&frag) {
                return Err(unresolved(l.no, "fragment", &frag));
            }
            if kw == "base" {
                l.finish()?;
                base = Some(frag);
                continue;
            }
            l.keyword("along")?;
            let along = l.ident()?;
            l.finish()?;
            if !self.ws.morphisms.contains_key(&along) {
                return Err(unresolved(l.no, "morphism", &along));
            }
            if kw == "left" {
                left = Some((frag, along));
            } else {
                right = Some((frag, along));
            }
        }
        let (Some(base), Some((left, left_along)), Some((right, right_along))) = (base, left, right) else {
            return Err(semantic(no, "a config needs `base`, `left` and `right` lines"));
        };
        self.ws.configs.insert(name, ConfigDecl { base, left, left_along, right, right_along });
        Ok(())
    }

    fn theory(&mut self) -> DslResult<()> {
        let no = self.line().no;
        let l = self.line();
        let name = l.ident()?;
        l.punct(":")?;
        let frag = l.ident()?;
        l.finish()?;
        self.fresh(no, "theory", &name, self.ws.theories.contains_key(&name))?;
        let f = self.ws.fragments.get(&frag).ok_or_else(|| unresolved(no, "fragment", &frag))?.fragment.clone();
        let mut members = Vec::new();
        while let Some(i) = self.body_line()? {
            let l = &mut self.lines[i];
            l.keyword("member")?;
            let m = l.ident()?;
            l.finish()?;
            if f.index_of(&m).is_none() {
                return Err(unresolved(l.no, "member", &m));
            }
            members.push(m);
        }
        self.ws.theories.insert(name, TheoryDecl { fragment: frag, members });
        Ok(())
    }
}

fn tuple_text(t: &[usize]) -> String {
    let inner: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", inner.join(", "))
}

fn print_structure_body(out: &mut String, s: &FinStructure, indent: &str) {
    for (r, tuples) in s.relations() {
        if tuples.is_empty() {
            continue;
        }
        let ts: Vec<String> = tuples.iter().map(|t| tuple_text(t)).collect();
        let _ = writeln!(out, "{indent}{r} {}", ts.join(" "));
    }
    let elems: Vec<usize> = (0..s.size()).collect();
    for (f, table) in s.functions() {
        let arity = s.lang().functions()[f];
        let graph: Vec<String> =
            tuples_over(&elems, arity).iter().zip(table).map(|(t, v)| format!("{} -> {v}", tuple_text(t))).collect();
        let _ = writeln!(out, "{indent}{f} {}", graph.join(" "));
    }
    for (c, v) in s.constants() {
        let _ = writeln!(out, "{indent}{c} = {v}");
    }
}

/// Renders one fragment; members equal to a top-level structure of the same
/// name are referenced, the rest are written inline.
pub fn print_fragment(out: &mut String, name: &str, lang: &str, f: &AecFragment, top: &BTreeMap<String, StructureDecl>) {
    let _ = writeln!(out, "fragment {name} : {lang}");
    for (m, s) in f.names().iter().zip(f.structures()) {
        if top.get(m).is_some_and(|d| &d.structure == s) {
            let _ = writeln!(out, "  member {m}");
        } else {
            let _ = writeln!(out, "  structure {m} size {}", s.size());
            print_structure_body(out, s, "    ");
            let _ = writeln!(out, "  end");
        }
    }
    for p in f.pairs() {
        let _ = writeln!(out, "  strong {} < {} {}", f.name(p.lower), f.name(p.upper), tuple_text(&p.inclusion.map));
    }
    let _ = writeln!(out, "end");
}

pub fn print(ws: &Workspace) -> String {
    let mut out = String::new();
    for (name, lang) in &ws.languages {
        let _ = writeln!(out, "language {name}");
        for (s, kind) in lang.symbols() {
            let _ = match kind {
                SymbolKind::Relation(a) => writeln!(out, "  relation {s} {a}"),
                SymbolKind::Function(a) => writeln!(out, "  function {s} {a}"),
                SymbolKind::Constant => writeln!(out, "  constant {s}"),
            };
        }
        let _ = writeln!(out, "end\n");
    }
    for (name, m) in &ws.morphisms {
        let _ = writeln!(out, "morphism {name} : {} -> {}", m.source, m.target);
        for (a, b) in m.morphism.map() {
            let _ = writeln!(out, "  {a} -> {b}");
        }
        let _ = writeln!(out, "end\n");
    }
    for (name, s) in &ws.structures {
        let _ = writeln!(out, "structure {name} : {} size {}", s.lang, s.structure.size());
        print_structure_body(&mut out, &s.structure, "  ");
        let _ = writeln!(out, "end\n");
    }
    for (name, f) in &ws.fragments {
        print_fragment(&mut out, name, &f.lang, &f.fragment, &ws.structures);
        out.push('\n');
    }
    for (name, c) in &ws.configs {
        let _ = writeln!(
            out,
            "config {name}\n  base {}\n  left {} along {}\n  right {} along {}\nend\n",
            c.base, c.left, c.left_along, c.right, c.right_along
        );
    }
    for (name, t) in &ws.theories {
        let _ = writeln!(out, "theory {name} : {}", t.fragment);
        for m in &t.members {
            let _ = writeln!(out, "  member {m}");
        }
        let _ = writeln!(out, "end\n");
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

/// A generated span as a workspace: languages `L`, `L0`, `L1`, inclusions
/// `a0`, `a1`, fragments `K`, `K0`, `K1` and the config `span`.
pub fn generate(seed: u64, profile: &Profile) -> crate::Result<Workspace> {
    let cfg = random_config(seed, profile)?;
    let mut ws = Workspace::default();
    let legs = [("L0", "a0", "K0", &cfg.left), ("L1", "a1", "K1", &cfg.right)];
    ws.languages.insert("L".into(), cfg.base.lang().clone());
    ws.fragments.insert("K".into(), FragmentDecl { lang: "L".into(), fragment: cfg.base.clone() });
    for (lang, along, frag, leg) in legs {
        ws.languages.insert(lang.into(), leg.source.lang().clone());
        ws.morphisms.insert(
            along.into(),
            MorphismDecl { source: "L".into(), target: lang.into(), morphism: leg.alpha.clone() },
        );
        ws.fragments.insert(frag.into(), FragmentDecl { lang: lang.into(), fragment: leg.source.clone() });
    }
    ws.configs.insert(
        "span".into(),
        ConfigDecl {
            base: "K".into(),
            left: "K0".into(),
            left_along: "a0".into(),
            right: "K1".into(),
            right_along: "a1".into(),
        },
    );
    Ok(ws)
}
