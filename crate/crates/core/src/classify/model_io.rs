//! Text model format.
//!
//! ```text
//! strokeminer-model v1
//! learner c45
//! classes expert novice
//! attributes 2
//! attribute m1_x_t0
//! attribute m1_y_t0
//! tree
//! split m1_y_t0 <= 12.5
//!   leaf expert counts 40 0
//!   leaf novice counts 3 72
//! ```
//!
//! Nodes are written in preorder with two spaces of indentation per level.
//! Split attributes are referenced by name. Numbers use the shortest decimal
//! form that reads back to the identical `f64`. Naive-Bayes leaves look like
//!
//! ```text
//! nb counts 10 0
//!   class expert prior 0.9166666666666666
//!     gauss m1_x_t0 mean 3 var 0.000000001
//!   class novice prior 0.08333333333333333 absent
//! ```

use std::str::FromStr;

use super::c45::{DecisionTree, TreeNode};
use super::naive_bayes::{Gaussian, NaiveBayesModel};
use super::nbtree::{NBNode, NBTree};
use super::{ClassifierError, Model};
use crate::stroke::SkillClass;

pub const MODEL_HEADER: &str = "strokeminer-model v1";

pub fn serialize_model(model: &Model) -> String {
    let (learner, schema, classes) = match model {
        Model::C45(t) => ("c45", &t.schema, &t.classes),
        Model::NBTree(t) => ("nbtree", &t.schema, &t.classes),
    };
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    out.push_str(&format!("learner {learner}\n"));
    let names: Vec<&str> = classes.iter().map(|c| c.as_str()).collect();
    out.push_str(&format!("classes {}\n", names.join(" ")));
    out.push_str(&format!("attributes {}\n", schema.len()));
    for name in schema {
        out.push_str(&format!("attribute {name}\n"));
    }
    out.push_str("tree\n");
    match model {
        Model::C45(t) => write_tree(&mut out, &t.root, schema, classes, 0),
        Model::NBTree(t) => write_nb_tree(&mut out, &t.root, schema, 0),
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn join_counts(counts: &[usize]) -> String {
    counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_tree(out: &mut String, node: &TreeNode, schema: &[String], classes: &[SkillClass], depth: usize) {
    indent(out, depth);
    match node {
        TreeNode::Leaf { class_counts, majority } => {
            out.push_str(&format!("leaf {} counts {}\n", classes[*majority], join_counts(class_counts)));
        }
        TreeNode::Internal { attribute, threshold, left, right } => {
            out.push_str(&format!("split {} <= {}\n", schema[*attribute], threshold));
            write_tree(out, left, schema, classes, depth + 1);
            write_tree(out, right, schema, classes, depth + 1);
        }
    }
}

fn write_nb_tree(out: &mut String, node: &NBNode, schema: &[String], depth: usize) {
    match node {
        NBNode::Leaf(model) => {
            indent(out, depth);
            out.push_str(&format!("nb counts {}\n", join_counts(&model.class_counts)));
            for ((class, prior), attrs) in model.classes.iter().zip(&model.priors).zip(&model.attributes) {
                indent(out, depth + 1);
                match attrs {
                    None => out.push_str(&format!("class {class} prior {prior} absent\n")),
                    Some(gs) => {
                        out.push_str(&format!("class {class} prior {prior}\n"));
                        for (name, g) in schema.iter().zip(gs) {
                            indent(out, depth + 2);
                            out.push_str(&format!("gauss {name} mean {} var {}\n", g.mean, g.variance));
                        }
                    }
                }
            }
        }
        NBNode::Internal { attribute, threshold, left, right } => {
            indent(out, depth);
            out.push_str(&format!("split {} <= {}\n", schema[*attribute], threshold));
            write_nb_tree(out, left, schema, depth + 1);
            write_nb_tree(out, right, schema, depth + 1);
        }
    }
}

pub fn deserialize_model(text: &str) -> Result<Model, ClassifierError> {
    let mut lines = Lines::new(text);
    let header = lines.next_raw()?;
    if header.trim_end() != MODEL_HEADER {
        return Err(lines.err(format!("expected header `{MODEL_HEADER}`")));
    }
    let learner = lines.keyword_line(0, "learner")?;
    let classes = lines
        .keyword_line(0, "classes")?
        .split_whitespace()
        .map(|c| SkillClass::from_str(c).map_err(|e| lines.err(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if classes.is_empty() {
        return Err(lines.err("no classes".into()));
    }
    let n_attr_text = lines.keyword_line(0, "attributes")?;
    let n_attr: usize = parse_num(&lines, &n_attr_text)?;
    let mut schema = Vec::with_capacity(n_attr);
    for _ in 0..n_attr {
        schema.push(lines.keyword_line(0, "attribute")?);
    }
    if !lines.keyword_line(0, "tree")?.is_empty() {
        return Err(lines.err("unexpected text after `tree`".into()));
    }
    let parser = Parser { schema: &schema, classes: &classes };
    let model = match learner.as_str() {
        "c45" => Model::C45(DecisionTree {
            root: parser.tree(&mut lines, 0)?,
            schema: schema.clone(),
            classes: classes.clone(),
        }),
        "nbtree" => Model::NBTree(NBTree {
            root: parser.nb_tree(&mut lines, 0)?,
            schema: schema.clone(),
            classes: classes.clone(),
        }),
        other => return Err(lines.err(format!("unknown learner `{other}`"))),
    };
    if let Some(extra) = lines.peek() {
        return Err(ClassifierError::Format(format!("line {}: trailing content `{}`", extra.0, extra.2)));
    }
    Ok(model)
}

fn parse_num<T: FromStr>(lines: &Lines, s: &str) -> Result<T, ClassifierError> {
    s.trim().parse().map_err(|_| lines.err(format!("invalid number `{s}`")))
}

struct Lines<'a> {
    items: Vec<(usize, usize, &'a str)>,
    pos: usize,
    raw_first: Option<&'a str>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut iter = text.lines().enumerate();
        let raw_first = iter.next().map(|(_, l)| l);
        let items = iter
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let body = l.trim_start_matches(' ');
                (i + 1, (l.len() - body.len()) / 2, body.trim_end())
            })
            .collect();
        Lines { items, pos: 0, raw_first }
    }

    fn line_no(&self) -> usize {
        self.items.get(self.pos).map_or(self.items.last().map_or(1, |l| l.0 + 1), |l| l.0)
    }

    fn err(&self, msg: String) -> ClassifierError {
        ClassifierError::Format(format!("line {}: {msg}", self.line_no()))
    }

    fn next_raw(&mut self) -> Result<&'a str, ClassifierError> {
        self.raw_first.take().ok_or_else(|| ClassifierError::Format("empty model file".into()))
    }

    fn peek(&self) -> Option<(usize, usize, &'a str)> {
        self.items.get(self.pos).copied()
    }

    /// Consumes a line at `depth` starting with `keyword`; returns the rest.
    fn keyword_line(&mut self, depth: usize, keyword: &str) -> Result<String, ClassifierError> {
        let (_, d, body) = self.peek().ok_or_else(|| self.err(format!("expected `{keyword}`, found end of file")))?;
        if d != depth {
            return Err(self.err(format!("expected indentation depth {depth}, found {d}")));
        }
        let rest = match body.strip_prefix(keyword) {
            Some(rest) if rest.is_empty() || rest.starts_with(' ') => rest.trim_start(),
            _ => return Err(self.err(format!("expected `{keyword}`, found `{body}`"))),
        };
        self.pos += 1;
        Ok(rest.to_string())
    }
}

struct Parser<'s> {
    schema: &'s [String],
    classes: &'s [SkillClass],
}

impl Parser<'_> {
    fn attribute(&self, lines: &Lines, name: &str) -> Result<usize, ClassifierError> {
        self.schema.iter().position(|s| s == name).ok_or_else(|| lines.err(format!("unknown attribute `{name}`")))
    }

    fn class(&self, lines: &Lines, name: &str) -> Result<usize, ClassifierError> {
        let class = SkillClass::from_str(name).map_err(|e| lines.err(e.to_string()))?;
        self.classes.iter().position(|&c| c == class).ok_or_else(|| lines.err(format!("class `{name}` not declared")))
    }

    fn counts(&self, lines: &Lines, s: &str) -> Result<Vec<usize>, ClassifierError> {
        let counts = s.split_whitespace().map(|c| parse_num(lines, c)).collect::<Result<Vec<usize>, _>>()?;
        if counts.len() != self.classes.len() {
            return Err(lines.err(format!("expected {} counts, found {}", self.classes.len(), counts.len())));
        }
        Ok(counts)
    }

    /// `split <name> <= <threshold>`, with the name possibly containing spaces.
    fn split_line(&self, lines: &Lines, rest: &str) -> Result<(usize, f64), ClassifierError> {
        let (name, threshold) = rest.rsplit_once(" <= ").ok_or_else(|| lines.err("malformed split".into()))?;
        let threshold: f64 = parse_num(lines, threshold)?;
        if threshold.is_nan() {
            return Err(lines.err("NaN threshold".into()));
        }
        Ok((self.attribute(lines, name)?, threshold))
    }

    fn tree(&self, lines: &mut Lines, depth: usize) -> Result<TreeNode, ClassifierError> {
        match lines.peek().map(|l| l.2.split(' ').next().unwrap_or("")) {
            Some("split") => {
                let rest = lines.keyword_line(depth, "split")?;
                let (attribute, threshold) = self.split_line(lines, &rest)?;
                let left = Box::new(self.tree(lines, depth + 1)?);
                let right = Box::new(self.tree(lines, depth + 1)?);
                Ok(TreeNode::Internal { attribute, threshold, left, right })
            }
            Some("leaf") => {
                let rest = lines.keyword_line(depth, "leaf")?;
                let (class, counts) = rest.split_once(" counts ").ok_or_else(|| lines.err("malformed leaf".into()))?;
                let majority = self.class(lines, class)?;
                Ok(TreeNode::Leaf { class_counts: self.counts(lines, counts)?, majority })
            }
            _ => Err(lines.err("expected `split` or `leaf`".into())),
        }
    }

    fn nb_tree(&self, lines: &mut Lines, depth: usize) -> Result<NBNode, ClassifierError> {
        match lines.peek().map(|l| l.2.split(' ').next().unwrap_or("")) {
            Some("split") => {
                let rest = lines.keyword_line(depth, "split")?;
                let (attribute, threshold) = self.split_line(lines, &rest)?;
                let left = Box::new(self.nb_tree(lines, depth + 1)?);
                let right = Box::new(self.nb_tree(lines, depth + 1)?);
                Ok(NBNode::Internal { attribute, threshold, left, right })
            }
            Some("nb") => {
                let rest = lines.keyword_line(depth, "nb")?;
                let counts =
                    self.counts(lines, rest.strip_prefix("counts").ok_or_else(|| lines.err("malformed nb".into()))?)?;
                let mut priors = Vec::new();
                let mut attributes = Vec::new();
                for (i, expected) in self.classes.iter().enumerate() {
                    let rest = lines.keyword_line(depth + 1, "class")?;
                    let mut parts = rest.split_whitespace();
                    let (name, kw, prior) = (parts.next(), parts.next(), parts.next());
                    let absent = match parts.next() {
                        None => false,
                        Some("absent") => true,
                        Some(other) => return Err(lines.err(format!("unexpected `{other}`"))),
                    };
                    if name.map(|n| self.class(lines, n)).transpose()? != Some(i) || kw != Some("prior") {
                        return Err(lines.err(format!("expected `class {expected} prior <p>`")));
                    }
                    priors.push(parse_num::<f64>(lines, prior.unwrap_or(""))?);
                    if absent != (counts[i] == 0) {
                        return Err(lines.err("absent marker disagrees with counts".into()));
                    }
                    if absent {
                        attributes.push(None);
                        continue;
                    }
                    let mut gs = Vec::with_capacity(self.schema.len());
                    for name in self.schema {
                        let rest = lines.keyword_line(depth + 2, "gauss")?;
                        let (lhs, var) =
                            rest.rsplit_once(" var ").ok_or_else(|| lines.err("malformed gauss".into()))?;
                        let (attr, mean) =
                            lhs.rsplit_once(" mean ").ok_or_else(|| lines.err("malformed gauss".into()))?;
                        if attr != name {
                            return Err(lines.err(format!("expected attribute `{name}`, found `{attr}`")));
                        }
                        let g = Gaussian { mean: parse_num(lines, mean)?, variance: parse_num(lines, var)? };
                        if g.variance.is_nan() || g.variance <= 0.0 {
                            return Err(lines.err("variance must be positive".into()));
                        }
                        gs.push(g);
                    }
                    attributes.push(Some(gs));
                }
                Ok(NBNode::Leaf(NaiveBayesModel {
                    classes: self.classes.to_vec(),
                    class_counts: counts,
                    priors,
                    attributes,
                }))
            }
            _ => Err(lines.err("expected `split` or `nb`".into())),
        }
    }
}
