//! Text and JSON forms of trees.
//!
//! Text grammar:
//!
//! ```text
//! tree  := label ( "(" tree ( "," tree )* ")" )?
//! label := bare | quoted
//! bare  := [A-Za-z0-9_.+-]+
//! quoted:= '"' ( [^"\\] | '\' ["\\ntr] )* '"'
//! ```
//!
//! Whitespace is allowed between tokens. The parser is iterative, so nesting
//! depth is bounded only by memory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, ParseErrorKind};
use crate::tree::{LabeledTree, Node, NodeId};

fn is_bare(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '+' | '-')
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.pos, kind }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(c) => self.err(ParseErrorKind::UnexpectedChar(c)),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn label(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('"') => {
                let start = self.pos;
                self.pos += 1;
                let mut out = String::new();
                loop {
                    let Some(c) = self.peek() else {
                        return Err(ParseError {
                            offset: start,
                            kind: ParseErrorKind::UnterminatedString,
                        });
                    };
                    self.pos += c.len_utf8();
                    match c {
                        '"' => return Ok(out),
                        '\\' => {
                            let Some(e) = self.peek() else {
                                return Err(ParseError {
                                    offset: start,
                                    kind: ParseErrorKind::UnterminatedString,
                                });
                            };
                            out.push(match e {
                                '"' => '"',
                                '\\' => '\\',
                                'n' => '\n',
                                't' => '\t',
                                'r' => '\r',
                                other => return Err(self.err(ParseErrorKind::BadEscape(other))),
                            });
                            self.pos += e.len_utf8();
                        }
                        c => out.push(c),
                    }
                }
            }
            Some(c) if is_bare(c) => {
                let start = self.pos;
                let len = self.src[start..]
                    .find(|c: char| !is_bare(c))
                    .unwrap_or(self.src.len() - start);
                self.pos += len;
                Ok(self.src[start..self.pos].to_owned())
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses one tree in text form.
pub fn parse_tree(src: &str) -> Result<LabeledTree, ParseError> {
    let mut lx = Lexer { src, pos: 0 };
    lx.skip_ws();
    if lx.peek().is_none() {
        return Err(lx.err(ParseErrorKind::Empty));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut parents: Vec<Option<usize>> = Vec::new();
    // stack of open nodes whose child list is being read
    let mut open: Vec<usize> = Vec::new();

    labels.push(lx.label()?);
    parents.push(None);
    let mut last = 0usize;
    loop {
        lx.skip_ws();
        match lx.peek() {
            Some('(') => {
                lx.pos += 1;
                open.push(last);
                last = labels.len();
                labels.push(lx.label()?);
                parents.push(Some(*open.last().unwrap()));
            }
            Some(',') if !open.is_empty() => {
                lx.pos += 1;
                last = labels.len();
                labels.push(lx.label()?);
                parents.push(Some(*open.last().unwrap()));
            }
            Some(')') if !open.is_empty() => {
                lx.pos += 1;
                last = open.pop().unwrap();
                // a closed node cannot take another child list
                lx.skip_ws();
                if lx.peek() == Some('(') {
                    return Err(lx.unexpected());
                }
            }
            None if open.is_empty() => break,
            None => return Err(lx.err(ParseErrorKind::UnexpectedEnd)),
            Some(_) if open.is_empty() => return Err(lx.err(ParseErrorKind::TrailingInput)),
            Some(_) => return Err(lx.unexpected()),
        }
    }
    let nodes = build_nodes(labels, &parents);
    Ok(LabeledTree::from_parents_unchecked(nodes))
}

fn build_nodes(labels: Vec<String>, parents: &[Option<usize>]) -> Vec<Node> {
    let mut nodes: Vec<Node> = labels
        .into_iter()
        .zip(parents)
        .map(|(label, p)| Node {
            label,
            parent: p.map(NodeId),
            children: Vec::new(),
        })
        .collect();
    for (i, p) in parents.iter().enumerate().skip(1) {
        let p = p.expect("non-root node has a parent");
        nodes[p].children.push(NodeId(i));
    }
    nodes
}

/// Writes `label` so that [`parse_tree`] reads it back unchanged.
pub fn write_label(out: &mut String, label: &str) {
    if !label.is_empty() && label.chars().all(is_bare) {
        out.push_str(label);
        return;
    }
    out.push('"');
    for c in label.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Text form of a tree, children in storage order.
pub fn serialize_tree(t: &LabeledTree) -> String {
    enum Step {
        Enter(NodeId),
        Close,
        Comma,
    }
    let mut out = String::new();
    let mut stack = vec![Step::Enter(t.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Enter(id) => {
                write_label(&mut out, t.label(id));
                let kids = t.children(id);
                if !kids.is_empty() {
                    out.push('(');
                    stack.push(Step::Close);
                    for (i, &c) in kids.iter().enumerate().rev() {
                        stack.push(Step::Enter(c));
                        if i > 0 {
                            stack.push(Step::Comma);
                        }
                    }
                }
            }
            Step::Close => out.push(')'),
            Step::Comma => out.push(','),
        }
    }
    out
}

/// Order-independent text form: children are sorted by their own canonical
/// strings. Two trees have equal canonical strings iff they are `≃_l`.
pub fn canonical_string(t: &LabeledTree) -> String {
    let mut repr: Vec<String> = vec![String::new(); t.len()];
    for id in t.postorder() {
        let mut s = String::new();
        write_label(&mut s, t.label(id));
        let kids = t.children(id);
        if !kids.is_empty() {
            let mut parts: Vec<String> = kids.iter().map(|c| std::mem::take(&mut repr[c.0])).collect();
            parts.sort();
            s.push('(');
            s.push_str(&parts.join(","));
            s.push(')');
        }
        repr[id.0] = s;
    }
    std::mem::take(&mut repr[0])
}

/// Nested JSON shape `{"label": .., "children": [..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTree {
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<JsonTree>,
}

impl JsonTree {
    pub fn from_tree(t: &LabeledTree) -> JsonTree {
        let mut built: Vec<Option<JsonTree>> = vec![None; t.len()];
        for id in t.postorder() {
            let children = t
                .children(id)
                .iter()
                .map(|c| built[c.0].take().expect("child built first"))
                .collect();
            built[id.0] = Some(JsonTree {
                label: t.label(id).to_owned(),
                children,
            });
        }
        built[0].take().unwrap()
    }

    pub fn into_tree(self) -> LabeledTree {
        let mut labels = Vec::new();
        let mut parents = Vec::new();
        let mut stack = vec![(self, None::<usize>)];
        // preorder with children pushed reversed keeps sibling order
        while let Some((j, parent)) = stack.pop() {
            let id = labels.len();
            labels.push(j.label);
            parents.push(parent);
            for c in j.children.into_iter().rev() {
                stack.push((c, Some(id)));
            }
        }
        LabeledTree::from_parents_unchecked(build_nodes(labels, &parents))
    }
}

/// Parses a tree from its nested JSON form.
pub fn tree_from_json(src: &str) -> Result<LabeledTree, Error> {
    // serde_json recursion is bounded (128 levels) so this cannot overflow
    let j: JsonTree = serde_json::from_str(src)?;
    Ok(j.into_tree())
}

pub fn tree_to_json(t: &LabeledTree) -> String {
    serde_json::to_string(&JsonTree::from_tree(t)).expect("tree JSON is infallible")
}

/// Reads a dataset: one tree per line, blank lines and `#` comments skipped.
pub fn parse_dataset(src: &str) -> Result<Vec<LabeledTree>, Error> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(parse_tree(trimmed).map_err(|source| Error::Dataset { line: i + 1, source })?);
    }
    Ok(out)
}

pub fn write_dataset(trees: &[LabeledTree]) -> String {
    let mut s = String::new();
    for t in trees {
        s.push_str(&serialize_tree(t));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_simple() {
        for src in ["a", "a(b,c)", "0(1(2(3,4),4(9,16),3(3,4)),2(4(6,8),8(18,32),6(6,8)))"] {
            let t = parse_tree(src).unwrap();
            assert_eq!(serialize_tree(&t), src);
        }
    }

    #[test]
    fn whitespace_and_quotes() {
        let t = parse_tree("  \"β\" ( \"a b\" , c )  ").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.label(NodeId(1)), "a b");
        assert_eq!(serialize_tree(&t), "\"β\"(\"a b\",c)");
        let t = parse_tree(r#""q\"\\\n""#).unwrap();
        assert_eq!(t.label(NodeId(0)), "q\"\\\n");
        assert_eq!(parse_tree(&serialize_tree(&t)).unwrap(), t);
    }

    #[test]
    fn error_offsets() {
        assert_eq!(parse_tree("").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(parse_tree("   ").unwrap_err().kind, ParseErrorKind::Empty);
        let e = parse_tree("a(b").unwrap_err();
        assert_eq!((e.offset, e.kind), (3, ParseErrorKind::UnexpectedEnd));
        let e = parse_tree("a(b,)").unwrap_err();
        assert_eq!((e.offset, e.kind), (4, ParseErrorKind::UnexpectedChar(')')));
        let e = parse_tree("a b").unwrap_err();
        assert_eq!((e.offset, e.kind), (2, ParseErrorKind::TrailingInput));
        let e = parse_tree("a()").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse_tree("a(b)(c)").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse_tree("\"abc").unwrap_err();
        assert_eq!((e.offset, e.kind), (0, ParseErrorKind::UnterminatedString));
        let e = parse_tree(r#""a\q""#).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::BadEscape('q'));
        assert!(parse_tree("a)").is_err());
        assert!(parse_tree("a,b").is_err());
    }

    #[test]
    fn deep_nesting_does_not_overflow() {
        let depth = 200_000;
        let mut s = "x(".repeat(depth);
        s.push('y');
        s.push_str(&")".repeat(depth));
        let t = parse_tree(&s).unwrap();
        assert_eq!(t.len(), depth + 1);
        assert_eq!(serialize_tree(&t), s);
        assert_eq!(canonical_string(&t).len(), s.len());
    }

    #[test]
    fn canonical_string_ignores_child_order() {
        let a = parse_tree("r(b(x,y),a)").unwrap();
        let b = parse_tree("r(a,b(y,x))").unwrap();
        assert_eq!(canonical_string(&a), canonical_string(&b));
        assert_ne!(canonical_string(&a), canonical_string(&parse_tree("r(a,b(y,y))").unwrap()));
    }

    #[test]
    fn json_round_trip() {
        let t = parse_tree("r(a(b,c),d)").unwrap();
        let j = tree_to_json(&t);
        assert_eq!(
            j,
            r#"{"label":"r","children":[{"label":"a","children":[{"label":"b"},{"label":"c"}]},{"label":"d"}]}"#
        );
        assert_eq!(tree_from_json(&j).unwrap(), t);
        assert!(tree_from_json("{}").is_err());
        assert!(tree_from_json("[").is_err());
    }

    #[test]
    fn dataset_lines() {
        let ds = parse_dataset("# header\na(b)\n\n  c \n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(write_dataset(&ds), "a(b)\nc\n");
        match parse_dataset("a\nb(\n").unwrap_err() {
            Error::Dataset { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
