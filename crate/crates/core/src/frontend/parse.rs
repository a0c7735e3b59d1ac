//! Line-oriented query language.
//!
//! ```text
//! context nat-sum-prod;
//! free b, d;
//! sum c, a in {1, 2};
//! factor R(a, b) from "r.tsv";
//! ```

use crate::error::{FaqError, Position, Result};
use crate::query::{FactorDecl, FaqQuery, Locus, VariableDecl};

pub(crate) const KEYWORDS: [&str; 5] = ["context", "free", "factor", "in", "from"];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Punct(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Position,
}

pub(crate) fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !",;{}()\"#".contains(c)
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

fn error(pos: Position, message: impl Into<String>) -> FaqError {
    FaqError::Parse {
        position: pos,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<(Vec<Token>, Position)> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut pos = Position { line: 1, column: 1 };
    let advance = |c: char, pos: &mut Position| {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let start = pos;
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut pos);
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut pos);
            }
        } else if ",;{}()".contains(c) {
            chars.next();
            advance(c, &mut pos);
            tokens.push(Token { tok: Tok::Punct(c), pos: start });
        } else if c == '"' {
            chars.next();
            advance(c, &mut pos);
            let mut s = String::new();
            loop {
                let Some(c) = chars.next() else {
                    return Err(error(start, "unterminated string"));
                };
                advance(c, &mut pos);
                match c {
                    '"' => break,
                    '\n' => return Err(error(start, "unterminated string")),
                    '\\' => {
                        let Some(e) = chars.next() else {
                            return Err(error(start, "unterminated string"));
                        };
                        advance(e, &mut pos);
                        match e {
                            '"' | '\\' => s.push(e),
                            't' => s.push('\t'),
                            _ => return Err(error(pos, format!("unknown escape `\\{e}`"))),
                        }
                    }
                    _ => s.push(c),
                }
            }
            tokens.push(Token { tok: Tok::Str(s), pos: start });
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !is_word_char(c) {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut pos);
            }
            tokens.push(Token { tok: Tok::Word(s), pos: start });
        }
    }
    Ok((tokens, pos))
}

struct Parser {
    tokens: Vec<Token>,
    next: usize,
    end: Position,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.next)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.next).cloned();
        self.next += 1;
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        match self.bump() {
            Some(Token { tok: Tok::Punct(p), .. }) if p == c => Ok(()),
            Some(t) => Err(error(t.pos, format!("expected `{c}`"))),
            None => Err(error(self.end, format!("expected `{c}` before end of input"))),
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c) {
            self.next += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Word(w), .. }) if w == kw) {
            self.next += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, Position)> {
        match self.bump() {
            Some(Token { tok: Tok::Word(w), pos }) => Ok((w, pos)),
            Some(t) => Err(error(t.pos, format!("expected {what}"))),
            None => Err(error(self.end, format!("expected {what} before end of input"))),
        }
    }

    fn identifier(&mut self, what: &str) -> Result<(String, Position)> {
        let (w, pos) = self.word(what)?;
        if !is_identifier(&w) {
            return Err(error(pos, format!("`{w}` is not a valid {what}")));
        }
        Ok((w, pos))
    }

    fn value(&mut self) -> Result<String> {
        match self.bump() {
            Some(Token { tok: Tok::Word(w) | Tok::Str(w), .. }) => Ok(w),
            Some(t) => Err(error(t.pos, "expected a domain value")),
            None => Err(error(self.end, "expected a domain value before end of input")),
        }
    }

    /// `name [in {v, ...}] (, name [in {...}])*`
    fn declarations(&mut self, aggregate: Option<&str>) -> Result<Vec<(VariableDecl, Position)>> {
        let mut out = Vec::new();
        loop {
            let (name, pos) = self.identifier("variable name")?;
            let mut domain = None;
            if self.eat_keyword("in") {
                self.expect_punct('{')?;
                let mut values = Vec::new();
                if !self.eat_punct('}') {
                    loop {
                        values.push(self.value()?);
                        if self.eat_punct('}') {
                            break;
                        }
                        self.expect_punct(',')?;
                    }
                }
                domain = Some(values);
            }
            out.push((
                VariableDecl {
                    name,
                    aggregate: aggregate.map(str::to_string),
                    domain,
                },
                pos,
            ));
            if !self.eat_punct(',') {
                break;
            }
        }
        self.expect_punct(';')?;
        Ok(out)
    }
}

/// Parses and validates a query; errors carry `line:column`.
pub fn parse_query(text: &str) -> Result<FaqQuery> {
    let (tokens, end) = lex(text)?;
    let mut p = Parser { tokens, next: 0, end };
    let mut context: Option<(String, Position)> = None;
    let mut variables = Vec::new();
    let mut var_pos = Vec::new();
    let mut factors = Vec::new();
    let mut factor_pos = Vec::new();
    while let Some(token) = p.peek().cloned() {
        let Tok::Word(head) = &token.tok else {
            return Err(error(token.pos, "expected a statement"));
        };
        p.next += 1;
        match head.as_str() {
            "context" => {
                let (name, pos) = p.word("context name")?;
                if context.is_some() {
                    return Err(error(token.pos, "context declared twice"));
                }
                context = Some((name, pos));
                p.expect_punct(';')?;
            }
            "free" => {
                for (decl, pos) in p.declarations(None)? {
                    variables.push(decl);
                    var_pos.push(pos);
                }
            }
            "factor" => {
                let (name, _) = p.identifier("factor name")?;
                p.expect_punct('(')?;
                let mut vars = Vec::new();
                if !p.eat_punct(')') {
                    loop {
                        vars.push(p.identifier("variable name")?.0);
                        if p.eat_punct(')') {
                            break;
                        }
                        p.expect_punct(',')?;
                    }
                }
                let path = if p.eat_keyword("from") {
                    match p.bump() {
                        Some(Token { tok: Tok::Str(s), .. }) => Some(s),
                        Some(t) => return Err(error(t.pos, "expected a quoted path")),
                        None => return Err(error(p.end, "expected a quoted path before end of input")),
                    }
                } else {
                    None
                };
                p.expect_punct(';')?;
                factors.push(FactorDecl { name, vars, path });
                factor_pos.push(token.pos);
            }
            "in" | "from" => return Err(error(token.pos, format!("unexpected `{head}`"))),
            aggregate => {
                let aggregate = aggregate.to_string();
                for (decl, pos) in p.declarations(Some(&aggregate))? {
                    variables.push(decl);
                    var_pos.push(pos);
                }
            }
        }
    }
    let Some((context, context_pos)) = context else {
        return Err(error(Position { line: 1, column: 1 }, "missing `context` declaration"));
    };
    let query = FaqQuery {
        context,
        variables,
        factors,
    };
    query.check().map_err(|(locus, e)| {
        let position = match locus {
            Locus::Context => context_pos,
            Locus::Variable(i) => var_pos[i],
            Locus::Factor(i) => factor_pos[i],
            Locus::End => end,
        };
        error(position, e.to_string())
    })?;
    Ok(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message(text: &str) -> (usize, usize, String) {
        match parse_query(text) {
            Err(FaqError::Parse { position, message }) => (position.line, position.column, message),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_full_syntax() {
        let q = parse_query(
            "# header\ncontext nat-sum-prod;\nfree b, d in {x, \"y z\"};\nsum c;\nmax a in {1,2};\nfactor R(a, b) from \"r.tsv\";\nfactor S(a,c,d);\n",
        )
        .unwrap();
        assert_eq!(q.context, "nat-sum-prod");
        assert_eq!(q.free_len(), 2);
        assert_eq!(q.variables[1].domain, Some(vec!["x".into(), "y z".into()]));
        assert_eq!(q.variables[3].aggregate.as_deref(), Some("max"));
        assert_eq!(q.factors[0].path.as_deref(), Some("r.tsv"));
        assert_eq!(q.factors[1].data_path(), "S.tsv");
    }

    #[test]
    fn reports_positions() {
        assert_eq!(message("context nat-sum-prod;\nfree x;\nsum y;\nfactor R(x);").0, 3);
        let (line, col, msg) = message("context nat-sum-prod;\nsum y;\nfree x;\nfactor R(x, y);");
        assert_eq!((line, col), (3, 6));
        assert!(msg.contains("after a bound"), "{msg}");
        let (line, col, _) = message("context nat-sum-prod;\nfree x\nsum y;");
        assert_eq!((line, col), (3, 1));
        let (_, _, msg) = message("context boolean;\nfree x;\nfactor R(x);");
        assert!(msg.contains("unknown context"));
        let (line, _, msg) = message("context nat-sum-prod;\nfree x;\nfactor R(x, z);");
        assert_eq!(line, 3);
        assert!(msg.contains("undeclared"));
        let (_, _, msg) = message("context nat-sum-prod;\nfree x;\nprod y;\nfactor R(x, y);");
        assert!(msg.contains("explicit domain"));
        let (_, _, msg) = message("context nat-sum-prod;\nfree x;\nsum x;\nfactor R(x);");
        assert!(msg.contains("twice"));
        let (_, _, msg) = message("context nat-sum-prod;\nfree x;\navg y;\nfactor R(x, y);");
        assert!(msg.contains("unknown aggregate"));
        assert!(message("free x;").2.contains("context"));
        assert!(message("context nat-sum-prod; factor R(x) from r.tsv;").2.contains("quoted"));
        assert!(message("context nat-sum-prod; free \"x\";").2.contains("variable name"));
    }
}
