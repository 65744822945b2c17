//! A checker for the ASP-Core-2 subset the encoder writes: normal rules,
//! integrity constraints, cardinality choice heads with conditional
//! elements, comparisons, arithmetic terms, intervals and `#const`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct AspSyntaxError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Num(i64),
    Not,
    Const,
    If,
    Dot,
    DotDot,
    Comma,
    Semi,
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    Rel,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, AspSyntaxError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let err = |m: String| AspSyntaxError { line: line_no, message: m };
        let b: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < b.len() {
            let c = b[i];
            let two = b.get(i + 1).copied();
            let (tok, len) = match c {
                '%' => break,
                c if c.is_whitespace() => {
                    i += 1;
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let end = (i..b.len()).find(|&j| !(b[j].is_ascii_alphanumeric() || b[j] == '_')).unwrap_or(b.len());
                    let word: String = b[i..end].iter().collect();
                    let tok = if word == "not" {
                        Tok::Not
                    } else if c.is_ascii_uppercase() || c == '_' {
                        Tok::Var(word)
                    } else {
                        Tok::Ident(word)
                    };
                    (tok, end - i)
                }
                c if c.is_ascii_digit() => {
                    let end = (i..b.len()).find(|&j| !b[j].is_ascii_digit()).unwrap_or(b.len());
                    let word: String = b[i..end].iter().collect();
                    (Tok::Num(word.parse().map_err(|_| err(format!("number `{word}` out of range")))?), end - i)
                }
                '#' => {
                    let end = (i + 1..b.len()).find(|&j| !b[j].is_ascii_alphabetic()).unwrap_or(b.len());
                    let word: String = b[i..end].iter().collect();
                    if word != "#const" {
                        return Err(err(format!("unsupported directive `{word}`")));
                    }
                    (Tok::Const, end - i)
                }
                ':' if two == Some('-') => (Tok::If, 2),
                ':' => (Tok::Colon, 1),
                '.' if two == Some('.') => (Tok::DotDot, 2),
                '.' => (Tok::Dot, 1),
                ',' => (Tok::Comma, 1),
                ';' => (Tok::Semi, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                '*' => (Tok::Star, 1),
                '!' if two == Some('=') => (Tok::Rel, 2),
                '<' | '>' if two == Some('=') => (Tok::Rel, 2),
                '<' | '>' | '=' => (Tok::Rel, 1),
                other => return Err(err(format!("unexpected character `{other}`"))),
            };
            out.push((tok, line_no));
            i += len;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(1, |(_, l)| *l)
    }

    fn fail<T>(&self, message: &str) -> Result<T, AspSyntaxError> {
        let found = self.peek().map_or("end of input".to_string(), |t| format!("{t:?}"));
        Err(AspSyntaxError { line: self.line(), message: format!("{message}, found {found}") })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), AspSyntaxError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.fail(&format!("expected {what}"))
        }
    }

    fn statement(&mut self) -> Result<(), AspSyntaxError> {
        if self.eat(&Tok::Const) {
            self.ident()?;
            self.expect(Tok::Rel, "`=`")?;
            self.term()?;
            return self.expect(Tok::Dot, "`.`");
        }
        if self.eat(&Tok::If) {
            self.body()?;
            return self.expect(Tok::Dot, "`.`");
        }
        self.head()?;
        if self.eat(&Tok::If) {
            self.body()?;
        }
        self.expect(Tok::Dot, "`.`")
    }

    fn head(&mut self) -> Result<(), AspSyntaxError> {
        let choice = match self.peek() {
            Some(Tok::LBrace) => true,
            Some(Tok::Num(_)) => {
                self.term()?;
                true
            }
            _ => false,
        };
        if !choice {
            return self.atom();
        }
        self.expect(Tok::LBrace, "`{`")?;
        if !self.eat(&Tok::RBrace) {
            loop {
                self.atom()?;
                if self.eat(&Tok::Colon) {
                    self.literals()?;
                }
                if !self.eat(&Tok::Semi) {
                    break;
                }
            }
            self.expect(Tok::RBrace, "`}`")?;
        }
        if matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_) | Tok::Var(_))) {
            self.term()?;
        }
        Ok(())
    }

    fn body(&mut self) -> Result<(), AspSyntaxError> {
        loop {
            self.literal()?;
            if !self.eat(&Tok::Comma) {
                return Ok(());
            }
        }
    }

    /// Literals of a conditional element, which end at `;` or `}`.
    fn literals(&mut self) -> Result<(), AspSyntaxError> {
        self.body()
    }

    fn literal(&mut self) -> Result<(), AspSyntaxError> {
        if self.eat(&Tok::Not) {
            return self.atom();
        }
        self.term()?;
        if self.eat(&Tok::Rel) {
            self.term()?;
        }
        Ok(())
    }

    fn ident(&mut self) -> Result<(), AspSyntaxError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail("expected a name"),
        }
    }

    fn atom(&mut self) -> Result<(), AspSyntaxError> {
        self.ident()?;
        self.arguments()
    }

    fn arguments(&mut self) -> Result<(), AspSyntaxError> {
        if self.eat(&Tok::LParen) {
            loop {
                self.term()?;
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(())
    }

    fn term(&mut self) -> Result<(), AspSyntaxError> {
        self.simple()?;
        while matches!(self.peek(), Some(Tok::Plus | Tok::Minus | Tok::Star | Tok::DotDot)) {
            self.pos += 1;
            self.simple()?;
        }
        Ok(())
    }

    fn simple(&mut self) -> Result<(), AspSyntaxError> {
        match self.peek() {
            Some(Tok::Num(_) | Tok::Var(_)) => {
                self.pos += 1;
                Ok(())
            }
            Some(Tok::Ident(_)) => self.atom(),
            Some(Tok::Minus) => {
                self.pos += 1;
                self.simple()
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                self.term()?;
                self.expect(Tok::RParen, "`)`")
            }
            _ => self.fail("expected a term"),
        }
    }
}

/// Checks that `text` is a sequence of well-formed statements.
pub fn check_syntax(text: &str) -> Result<(), AspSyntaxError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    while p.peek().is_some() {
        p.statement()?;
    }
    Ok(())
}
