use thiserror::Error;

use super::{check_wellformed, Channel, Context, Prefix, Process, TypedProcess, WellFormedError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("at byte {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Scope(#[from] WellFormedError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    LBracket,
    RBracket,
    LParen,
    RParen,
    Dot,
    Bar,
    Plus,
    Num(usize),
    Prefix(Prefix),
    New,
    Rec,
    Ident(String),
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    let syntax = |position: usize, msg: String| ParseError {
        position,
        kind: ParseErrorKind::Syntax(msg),
    };
    while pos < bytes.len() {
        let c = bytes[pos];
        let start = pos;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                pos += 1;
                continue;
            }
            b'[' => out.push((Token::LBracket, start)),
            b']' => out.push((Token::RBracket, start)),
            b'(' => out.push((Token::LParen, start)),
            b')' => out.push((Token::RParen, start)),
            b'.' => out.push((Token::Dot, start)),
            b'|' => out.push((Token::Bar, start)),
            b'+' => out.push((Token::Plus, start)),
            b'0'..=b'9' => {
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let n = text[start..pos]
                    .parse()
                    .map_err(|_| syntax(start, "number out of range".into()))?;
                out.push((Token::Num(n), start));
                continue;
            }
            b'\'' => {
                pos += 1;
                let word_start = pos;
                while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                    pos += 1;
                }
                match channel_name(&text[word_start..pos]) {
                    Some(ch) => out.push((Token::Prefix(Prefix::Out(ch)), start)),
                    None => return Err(syntax(start, "expected a channel name after `'`".into())),
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                    pos += 1;
                }
                let word = &text[start..pos];
                let tok = match word {
                    "tick" => Token::Prefix(Prefix::Tick),
                    "new" => Token::New,
                    "rec" => Token::Rec,
                    _ => match channel_name(word) {
                        Some(ch) => Token::Prefix(Prefix::In(ch)),
                        None => Token::Ident(word.to_string()),
                    },
                };
                out.push((tok, start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character {ch:?}")));
            }
        }
        pos += 1;
    }
    Ok(out)
}

fn channel_name(word: &str) -> Option<Channel> {
    let digits = word.strip_prefix('a')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

struct Scope {
    name: String,
    context: Context,
    guarded: bool,
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    context: Context,
    scopes: Vec<Scope>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            position: self.offset(),
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn body(&mut self) -> Result<Process, ParseError> {
        match self.peek() {
            Some(Token::New) => self.restriction(Self::body),
            Some(Token::Rec) => self.recursion(Self::body),
            _ => self.par(),
        }
    }

    fn restriction(
        &mut self,
        inner: fn(&mut Self) -> Result<Process, ParseError>,
    ) -> Result<Process, ParseError> {
        self.pos += 1;
        match self.peek() {
            Some(Token::Ident(_)) | Some(Token::Prefix(Prefix::In(_))) => self.pos += 1,
            _ => return Err(self.error("expected a name after `new`")),
        }
        self.expect(Token::Dot, "`.` after the restricted name")?;
        let saved = self.context;
        self.context = self.context.extended();
        let body = inner(self);
        self.context = saved;
        Ok(Process::nu(body?))
    }

    fn recursion(
        &mut self,
        inner: fn(&mut Self) -> Result<Process, ParseError>,
    ) -> Result<Process, ParseError> {
        self.pos += 1;
        let name = match self.peek() {
            Some(Token::Ident(x)) => x.clone(),
            _ => return Err(self.error("expected a recursion variable after `rec`")),
        };
        self.pos += 1;
        self.expect(Token::Dot, "`.` after the recursion variable")?;
        self.scopes.push(Scope {
            name: name.clone(),
            context: self.context,
            guarded: false,
        });
        let body = inner(self);
        self.scopes.pop();
        Ok(Process::rec(name, body?))
    }

    fn par(&mut self) -> Result<Process, ParseError> {
        let mut acc = self.sum()?;
        while self.peek() == Some(&Token::Bar) {
            self.pos += 1;
            let rhs = self.sum()?;
            acc = Process::par(acc, rhs);
        }
        Ok(acc)
    }

    fn sum(&mut self) -> Result<Process, ParseError> {
        let start = self.offset();
        let first = self.summand()?;
        if self.peek() != Some(&Token::Plus) {
            return Ok(first);
        }
        let mut branches = Vec::new();
        let mut push = |p: Process, at: usize| match p {
            Process::Sum(bs) => {
                branches.extend(bs);
                Ok(())
            }
            _ => Err(ParseError {
                position: at,
                kind: ParseErrorKind::Syntax("operands of `+` must be guarded sums".into()),
            }),
        };
        push(first, start)?;
        while self.peek() == Some(&Token::Plus) {
            self.pos += 1;
            let at = self.offset();
            let next = self.summand()?;
            push(next, at)?;
        }
        Ok(Process::Sum(branches))
    }

    fn summand(&mut self) -> Result<Process, ParseError> {
        self.atom()
    }

    fn prefixed(&mut self, prefix: Prefix) -> Result<Process, ParseError> {
        let at = self.offset();
        if let Some(channel) = prefix.channel() {
            if !self.context.contains(channel) {
                return Err(ParseError {
                    position: at,
                    kind: WellFormedError::UnboundChannel { channel, context: self.context }.into(),
                });
            }
        }
        self.pos += 1;
        self.expect(Token::Dot, "`.` after a prefix")?;
        let saved: Vec<bool> = self.scopes.iter().map(|s| s.guarded).collect();
        self.scopes.iter_mut().for_each(|s| s.guarded = true);
        let cont = self.atom();
        for (s, g) in self.scopes.iter_mut().zip(saved) {
            s.guarded = g;
        }
        Ok(Process::prefixed(prefix, cont?))
    }

    fn atom(&mut self) -> Result<Process, ParseError> {
        match self.peek().cloned() {
            Some(Token::Num(0)) => {
                self.pos += 1;
                Ok(Process::nil())
            }
            Some(Token::Prefix(prefix)) => self.prefixed(prefix),
            Some(Token::LParen) => {
                self.pos += 1;
                let p = self.body()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(p)
            }
            Some(Token::New) => self.restriction(Self::atom),
            Some(Token::Rec) => self.recursion(Self::atom),
            Some(Token::Ident(x)) => {
                let at = self.offset();
                let scope_err = |e: WellFormedError| ParseError { position: at, kind: e.into() };
                let scope = self
                    .scopes
                    .iter()
                    .rev()
                    .find(|s| s.name == x)
                    .ok_or_else(|| scope_err(WellFormedError::UnboundVariable(x.clone())))?;
                if !scope.guarded {
                    return Err(scope_err(WellFormedError::UnguardedVariable(x)));
                }
                if scope.context != self.context {
                    return Err(scope_err(WellFormedError::VariableUnderRestriction(x)));
                }
                self.pos += 1;
                Ok(Process::RecVar(x))
            }
            Some(_) => Err(self.error("expected a process")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses `[gamma] body` into a well-formed process and its context.
pub fn parse_ccs(text: &str) -> Result<TypedProcess, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        context: Context(0),
        scopes: Vec::new(),
    };
    parser.expect(Token::LBracket, "`[` opening the context")?;
    let gamma = match parser.peek() {
        Some(Token::Num(n)) => *n,
        _ => return Err(parser.error("expected the context size")),
    };
    parser.pos += 1;
    parser.expect(Token::RBracket, "`]` closing the context")?;
    parser.context = Context(gamma);
    let process = parser.body()?;
    if parser.peek().is_some() {
        return Err(parser.error("trailing input"));
    }
    let context = Context(gamma);
    check_wellformed(context, &process).map_err(|e| ParseError {
        position: 0,
        kind: e.into(),
    })?;
    Ok(TypedProcess { context, process })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> TypedProcess {
        parse_ccs(text).unwrap_or_else(|e| panic!("{text}: {e}"))
    }

    #[test]
    fn parses_parallel_composition() {
        let p = parse("[2] a1.0 | 'a2.0");
        assert_eq!(p.context, Context(2));
        assert_eq!(
            p.process,
            Process::par(
                Process::prefixed(Prefix::In(1), Process::nil()),
                Process::prefixed(Prefix::Out(2), Process::nil()),
            )
        );
    }

    #[test]
    fn binder_shifts_context() {
        let p = parse("[0] new a. a1.0");
        assert_eq!(p.context, Context(0));
        assert_eq!(p.process, Process::nu(Process::prefixed(Prefix::In(1), Process::nil())));
    }

    #[test]
    fn unbound_channel_is_reported() {
        let err = parse_ccs("[1] a2.0").unwrap_err();
        assert_eq!(err.position, 4);
        assert!(matches!(
            err.kind,
            ParseErrorKind::Scope(WellFormedError::UnboundChannel { channel: 2, .. })
        ));
    }

    #[test]
    fn unguarded_recursion_is_reported() {
        let err = parse_ccs("[0] rec X. X").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Scope(WellFormedError::UnguardedVariable(_))));
        let err = parse_ccs("[1] rec X. (X | a1.0)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Scope(WellFormedError::UnguardedVariable(_))));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_ccs("[1] a1.").unwrap_err();
        assert_eq!(err.position, 7);
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        assert!(parse_ccs("1] 0").is_err());
        assert!(parse_ccs("[1] 0 0").is_err());
        assert!(parse_ccs("[1] a1.0 + (a1.0 | a1.0)").is_err());
    }

    #[test]
    fn sums_and_ticks() {
        let p = parse("[1] a1.0 + a1.tick.0");
        assert_eq!(
            p.process,
            Process::Sum(vec![
                (Prefix::In(1), Process::nil()),
                (Prefix::In(1), Process::prefixed(Prefix::Tick, Process::nil())),
            ])
        );
    }

    #[test]
    fn recursion_and_nested_binders() {
        let p = parse("[1] rec X. (a1.X + tick.0)");
        assert!(matches!(p.process, Process::RecDef(..)));
        let p = parse("[1] new a. (a2.0 | 'a2.0 | a1.0)");
        assert!(matches!(p.process, Process::Nu(_)));
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "[2] a1.0 | 'a2.0",
            "[0] new a. (a1.tick.0 | 'a1.0)",
            "[2] a1.a2.0 + a2.a1.0",
            "[1] a1.(a1.0 + 'a1.0) | (new a. a2.0) | tick.0",
            "[1] rec X. a1.'a1.X + tick.0",
            "[1] (a1.0 | a1.0) | (a1.0 | tick.0)",
        ] {
            let p = parse(text);
            let printed = p.to_string();
            assert_eq!(parse(&printed), p, "{text} printed as {printed}");
        }
    }

    #[test]
    fn json_export_has_explicit_context() {
        let p = parse("[1] a1.0");
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["context"], 1);
        let back: TypedProcess = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }
}
