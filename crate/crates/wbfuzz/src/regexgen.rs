//! Bounded generator for a practical regex subset.
//!
//! Specializations learned from `Pattern` constraints need strings that
//! *match* a pattern, not a matcher. This parses a small AST (literals,
//! classes, groups, alternation, `? * + {m,n}`) and samples from it with
//! bounded repetition, so generation is total and deterministic under a
//! seeded RNG. Unsupported syntax is a parse error; callers fall back to
//! free-form strings.

use rand::Rng as _;

use crate::Rng;

const UNBOUNDED_EXTRA: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Empty,
    Literal(char),
    AnyChar,
    Class(Vec<(char, char)>),
    Sequence(Vec<Node>),
    Alternation(Vec<Node>),
    Repeat { node: Box<Node>, min: u32, max: u32 },
}

pub fn parse(pattern: &str) -> Result<Node, String> {
    let chars: Vec<char> = pattern.chars().collect();
    let mut p = Parser { chars, pos: 0 };
    let node = p.alternation()?;
    if p.pos != p.chars.len() {
        return Err(format!("trailing input at position {}", p.pos));
    }
    Ok(node)
}

/// Samples one matching string. Unbounded quantifiers are capped at
/// `min + UNBOUNDED_EXTRA` repetitions.
pub fn sample(node: &Node, rng: &mut Rng) -> String {
    let mut out = String::new();
    emit(node, rng, &mut out);
    out
}

fn emit(node: &Node, rng: &mut Rng, out: &mut String) {
    match node {
        Node::Empty => {}
        Node::Literal(c) => out.push(*c),
        Node::AnyChar => {
            // Printable ASCII, newline excluded.
            let c = (0x20u8 + rng.random_range(0..95u8)) as char;
            out.push(c);
        }
        Node::Class(ranges) => {
            let total: u32 = ranges.iter().map(|(lo, hi)| *hi as u32 - *lo as u32 + 1).sum();
            let mut pick = rng.random_range(0..total);
            for (lo, hi) in ranges {
                let span = *hi as u32 - *lo as u32 + 1;
                if pick < span {
                    out.push(char::from_u32(*lo as u32 + pick).expect("ascii range"));
                    return;
                }
                pick -= span;
            }
        }
        Node::Sequence(nodes) => {
            for n in nodes {
                emit(n, rng, out);
            }
        }
        Node::Alternation(branches) => {
            let i = rng.random_range(0..branches.len());
            emit(&branches[i], rng, out);
        }
        Node::Repeat { node, min, max } => {
            let n = if min == max {
                *min
            } else {
                rng.random_range(*min..=*max)
            };
            for _ in 0..n {
                emit(node, rng, out);
            }
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn alternation(&mut self) -> Result<Node, String> {
        let mut branches = vec![self.sequence()?];
        while self.peek() == Some('|') {
            self.bump();
            branches.push(self.sequence()?);
        }
        if branches.len() == 1 {
            Ok(branches.pop().expect("one branch"))
        } else {
            Ok(Node::Alternation(branches))
        }
    }

    fn sequence(&mut self) -> Result<Node, String> {
        let mut nodes = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            nodes.push(self.repeat()?);
        }
        match nodes.len() {
            0 => Ok(Node::Empty),
            1 => Ok(nodes.pop().expect("one node")),
            _ => Ok(Node::Sequence(nodes)),
        }
    }

    fn repeat(&mut self) -> Result<Node, String> {
        let atom = self.atom()?;
        let (min, max) = match self.peek() {
            Some('?') => {
                self.bump();
                (0, 1)
            }
            Some('*') => {
                self.bump();
                (0, UNBOUNDED_EXTRA)
            }
            Some('+') => {
                self.bump();
                (1, 1 + UNBOUNDED_EXTRA)
            }
            Some('{') => {
                self.bump();
                self.braced_bounds()?
            }
            _ => return Ok(atom),
        };
        if min > max {
            return Err(format!("bad repetition bounds {{{min},{max}}}"));
        }
        Ok(Node::Repeat {
            node: Box::new(atom),
            min,
            max,
        })
    }

    fn braced_bounds(&mut self) -> Result<(u32, u32), String> {
        let mut first = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                first.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let min: u32 = first.parse().map_err(|_| "empty {m} bound".to_string())?;
        let max = match self.bump() {
            Some('}') => min,
            Some(',') => {
                let mut second = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        second.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if self.bump() != Some('}') {
                    return Err("unterminated {m,n}".to_string());
                }
                if second.is_empty() {
                    min + UNBOUNDED_EXTRA
                } else {
                    second.parse().map_err(|_| "bad {m,n} bound".to_string())?
                }
            }
            _ => return Err("unterminated {m}".to_string()),
        };
        Ok((min, max))
    }

    fn atom(&mut self) -> Result<Node, String> {
        match self.bump() {
            None => Err("unexpected end of pattern".to_string()),
            Some('(') => {
                // Non-capturing prefix is accepted and ignored.
                if self.peek() == Some('?') {
                    self.bump();
                    if self.bump() != Some(':') {
                        return Err("only (?: groups are supported".to_string());
                    }
                }
                let inner = self.alternation()?;
                if self.bump() != Some(')') {
                    return Err("unterminated group".to_string());
                }
                Ok(inner)
            }
            Some('[') => self.class(),
            Some('.') => Ok(Node::AnyChar),
            Some('^') | Some('$') => Ok(Node::Empty),
            Some('\\') => self.escape(),
            Some(c) if "*+?{}".contains(c) => Err(format!("dangling quantifier `{c}`")),
            Some(c) => Ok(Node::Literal(c)),
        }
    }

    fn escape(&mut self) -> Result<Node, String> {
        match self.bump() {
            None => Err("dangling escape".to_string()),
            Some('d') => Ok(Node::Class(vec![('0', '9')])),
            Some('w') => Ok(Node::Class(vec![
                ('0', '9'),
                ('A', 'Z'),
                ('_', '_'),
                ('a', 'z'),
            ])),
            Some('s') => Ok(Node::Literal(' ')),
            Some(c) if !c.is_alphanumeric() => Ok(Node::Literal(c)),
            Some(c) => Err(format!("unsupported escape \\{c}")),
        }
    }

    fn class(&mut self) -> Result<Node, String> {
        if self.peek() == Some('^') {
            return Err("negated classes are not supported".to_string());
        }
        let mut ranges = Vec::new();
        loop {
            let lo = match self.bump() {
                None => return Err("unterminated class".to_string()),
                Some(']') => break,
                Some('\\') => match self.bump() {
                    Some('d') => {
                        ranges.push(('0', '9'));
                        continue;
                    }
                    Some('w') => {
                        ranges.extend([('0', '9'), ('A', 'Z'), ('_', '_'), ('a', 'z')]);
                        continue;
                    }
                    Some(c) if !c.is_alphanumeric() => c,
                    other => return Err(format!("unsupported class escape {other:?}")),
                },
                Some(c) => c,
            };
            if self.peek() == Some('-') && self.chars.get(self.pos + 1) != Some(&']') {
                self.bump();
                let hi = self.bump().ok_or("unterminated range")?;
                if hi < lo {
                    return Err(format!("inverted range {lo}-{hi}"));
                }
                ranges.push((lo, hi));
            } else {
                ranges.push((lo, lo));
            }
        }
        if ranges.is_empty() {
            return Err("empty character class".to_string());
        }
        Ok(Node::Class(ranges))
    }
}
