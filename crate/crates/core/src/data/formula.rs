use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terms {
    /// `.`: every column except the response.
    AllRemaining,
    Explicit(Vec<String>),
}

/// `response ~ . - excluded` or `response ~ a + b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaSpec {
    pub response: String,
    pub terms: Terms,
    pub exclusions: Vec<String>,
}

impl FormulaSpec {
    /// Term names in formula order (dataset order for `.`), exclusions removed.
    pub fn resolve(&self, dataset: &Dataset) -> Result<Vec<String>> {
        dataset.require(&self.response)?;
        for name in &self.exclusions {
            dataset.require(name)?;
        }
        let candidates: Vec<String> = match &self.terms {
            Terms::AllRemaining => dataset
                .column_names()
                .iter()
                .filter(|c| **c != self.response)
                .cloned()
                .collect(),
            Terms::Explicit(list) => {
                let mut out: Vec<String> = Vec::with_capacity(list.len());
                for name in list {
                    if *name == self.response {
                        return Err(Error::ResponseAsTerm(name.clone()));
                    }
                    dataset.require(name)?;
                    if !out.contains(name) {
                        out.push(name.clone());
                    }
                }
                out
            }
        };
        let resolved: Vec<String> = candidates
            .into_iter()
            .filter(|c| !self.exclusions.contains(c))
            .collect();
        if resolved.is_empty() {
            return Err(Error::EmptyTerms);
        }
        Ok(resolved)
    }
}

impl std::fmt::Display for FormulaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ~ ", self.response)?;
        match &self.terms {
            Terms::AllRemaining => write!(f, ".")?,
            Terms::Explicit(list) => write!(f, "{}", list.join(" + "))?,
        }
        for ex in &self.exclusions {
            write!(f, " - {ex}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Tilde,
    Plus,
    Minus,
    Dot,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '~' => {
                chars.next();
                tokens.push(Token::Tilde);
            }
            '+' => {
                chars.next();
                tokens.push(Token::Plus);
            }
            '-' => {
                chars.next();
                tokens.push(Token::Minus);
            }
            '`' => {
                chars.next();
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('`') => break,
                        Some(ch) => name.push(ch),
                        None => return Err(Error::FormulaSyntax("unterminated backtick".into())),
                    }
                }
                if name.is_empty() {
                    return Err(Error::FormulaSyntax("empty quoted name".into()));
                }
                tokens.push(Token::Ident(name));
            }
            _ => {
                let mut word = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || matches!(ch, '~' | '+' | '-' | '`') {
                        break;
                    }
                    if matches!(ch, '(' | ')' | '*' | ':' | '^' | '|' | '/') {
                        return Err(Error::FormulaSyntax(format!(
                            "unsupported operator {ch:?}"
                        )));
                    }
                    word.push(ch);
                    chars.next();
                }
                tokens.push(if word == "." {
                    Token::Dot
                } else {
                    Token::Ident(word)
                });
            }
        }
    }
    Ok(tokens)
}

fn expect_ident(tokens: &[Token], pos: &mut usize, what: &str) -> Result<String> {
    match tokens.get(*pos) {
        Some(Token::Ident(name)) => {
            *pos += 1;
            Ok(name.clone())
        }
        other => Err(Error::FormulaSyntax(format!(
            "expected {what}, found {}",
            describe(other)
        ))),
    }
}

fn describe(tok: Option<&Token>) -> String {
    match tok {
        None => "end of input".into(),
        Some(Token::Ident(s)) => format!("{s:?}"),
        Some(Token::Tilde) => "'~'".into(),
        Some(Token::Plus) => "'+'".into(),
        Some(Token::Minus) => "'-'".into(),
        Some(Token::Dot) => "'.'".into(),
    }
}

/// Parses `response ~ ( . | term (+ term)* ) (- term)*` and checks it against `dataset`.
pub fn parse_formula(text: &str, dataset: &Dataset) -> Result<FormulaSpec> {
    let tokens = tokenize(text)?;
    let mut pos = 0;
    let response = expect_ident(&tokens, &mut pos, "response name")?;
    if tokens.get(pos) != Some(&Token::Tilde) {
        return Err(Error::FormulaSyntax(format!(
            "expected '~', found {}",
            describe(tokens.get(pos))
        )));
    }
    pos += 1;

    let terms = if tokens.get(pos) == Some(&Token::Dot) {
        pos += 1;
        Terms::AllRemaining
    } else {
        let mut list = vec![expect_ident(&tokens, &mut pos, "term")?];
        while tokens.get(pos) == Some(&Token::Plus) {
            pos += 1;
            list.push(expect_ident(&tokens, &mut pos, "term")?);
        }
        Terms::Explicit(list)
    };

    let mut exclusions = Vec::new();
    while tokens.get(pos) == Some(&Token::Minus) {
        pos += 1;
        exclusions.push(expect_ident(&tokens, &mut pos, "excluded term")?);
    }
    if pos != tokens.len() {
        return Err(Error::FormulaSyntax(format!(
            "unexpected {}",
            describe(tokens.get(pos))
        )));
    }

    let spec = FormulaSpec {
        response,
        terms,
        exclusions,
    };
    spec.resolve(dataset)?;
    Ok(spec)
}
