"""Recursive-descent parser for the decision language.

Grammar sketch (sugar included; ``//`` starts a line comment)::

    expr  := IDENT '<-' expr ';' expr
           | 'observe' pure ';' expr
           | 'if' guard 'then' expr 'else' expr
           | 'choose' scrut ('|' IDENT '->' expr)+
           | 'reward' NUM expr?          -- trailing form when no expr follows
           | 'flip' NUM | 'return' pure | 'loop' INT '{' expr '}'
           | '[' IDENT (',' IDENT)* ']' | 'disc' '[' IDENT ':' NUM , ... ']'
           | '(' ')' | '(' expr ')' | pure        -- bare pure means return
    pure  := or-tier of '&&' '||' '!' over IDENT, 'tt', 'ff', parens

A guard may also be a one-name choice introduction, desugared later into a
binary decision.  Nested ``choose`` inside an arm must be parenthesized.
"""

from __future__ import annotations

from . import ast as A


class DapplSyntaxError(Exception):
    def __init__(self, message, line=0, col=0):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


KEYWORDS = {
    "if", "then", "else", "choose", "observe", "reward", "return",
    "flip", "loop", "disc", "tt", "ff", "true", "false", "with",
}

_SYMBOLS = ["<-", "->", "&&", "||", ";", "|", "[", "]", "(", ")", "{", "}", ":", ",", "!", "-"]


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r})"


def tokenize(source: str):
    tokens = []
    line, col, i = 1, 1, 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            tokens.append(Token("num", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise DapplSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead=0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind, text=None, ahead=0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind, text=None) -> Token:
        tok = self.peek()
        if not self.at(kind, text):
            want = text or kind
            raise DapplSyntaxError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return self.next()

    def span(self) -> A.Span:
        tok = self.peek()
        return A.Span(tok.line, tok.col)

    def error(self, message):
        tok = self.peek()
        raise DapplSyntaxError(message, tok.line, tok.col)

    # -- numbers -------------------------------------------------------------

    def number(self, allow_negative=True) -> float:
        neg = False
        if allow_negative and self.at("sym", "-"):
            self.next()
            neg = True
        tok = self.expect("num")
        try:
            value = float(tok.text)
        except ValueError:
            raise DapplSyntaxError(f"bad number {tok.text!r}", tok.line, tok.col)
        return -value if neg else value

    # -- expressions -----------------------------------------------------------

    def parse_program(self) -> A.Expr:
        expr = self.parse_expr()
        self.expect("eof")
        return expr

    def parse_expr(self) -> A.Expr:
        sp = self.span()
        if self.at("ident") and self.at("sym", "<-", ahead=1):
            name = self.next().text
            self.next()
            value = self.parse_expr_no_seq()
            self.expect("sym", ";")
            body = self.parse_expr()
            return A.Bind(span=sp, name=name, value=value, body=body)
        if self.at("kw", "observe"):
            self.next()
            guard = self.parse_pure()
            self.expect("sym", ";")
            body = self.parse_expr()
            return A.Observe(span=sp, guard=guard, body=body)
        return self.parse_expr_no_seq()

    def parse_expr_no_seq(self) -> A.Expr:
        sp = self.span()
        if self.at("kw", "if"):
            return self.parse_ite()
        if self.at("kw", "choose"):
            return self.parse_choose()
        if self.at("kw", "reward"):
            self.next()
            amount = self.number()
            if self.starts_expr():
                return A.Reward(span=sp, amount=amount, body=self.parse_expr_no_seq())
            return A.Reward(span=sp, amount=amount, body=None)
        if self.at("kw", "flip"):
            self.next()
            theta = self.number(allow_negative=False)
            if not 0.0 <= theta <= 1.0:
                raise DapplSyntaxError(f"flip bias {theta} outside [0, 1]", sp.line, sp.col)
            return A.Flip(span=sp, theta=theta)
        if self.at("kw", "return"):
            self.next()
            return A.Return(span=sp, pure=self.parse_pure())
        if self.at("kw", "loop"):
            self.next()
            count_tok = self.expect("num")
            if "." in count_tok.text:
                raise DapplSyntaxError("loop bound must be an integer", count_tok.line, count_tok.col)
            self.expect("sym", "{")
            body = self.parse_expr()
            self.expect("sym", "}")
            return A.Loop(span=sp, count=int(count_tok.text), body=body)
        if self.at("sym", "["):
            return self.parse_choice_intro()
        if self.at("kw", "disc"):
            return self.parse_disc()
        if self.at("sym", "("):
            if self.at("sym", ")", ahead=1):
                self.next()
                self.next()
                return A.Unit(span=sp)
            # could be a parenthesized expression or a pure term; expressions
            # subsume pures via return-promotion, but a pure may continue with
            # a binary operator after the closing paren.
            start = self.pos
            self.next()
            inner = self.parse_expr()
            self.expect("sym", ")")
            if isinstance(inner, A.Return) and (self.at("sym", "&&") or self.at("sym", "||")):
                self.pos = start
                return A.Return(span=sp, pure=self.parse_pure())
            return inner
        if self.at("ident") or self.at("kw", "tt") or self.at("kw", "ff") \
                or self.at("kw", "true") or self.at("kw", "false") or self.at("sym", "!"):
            return A.Return(span=sp, pure=self.parse_pure())
        self.error(f"expected an expression, found {self.peek().text!r}")

    def starts_expr(self) -> bool:
        if self.at("ident"):
            return True
        if self.at("sym") and self.peek().text in ("[", "(", "!"):
            return True
        if self.at("kw") and self.peek().text in (
            "if", "choose", "observe", "reward", "return", "flip", "loop",
            "disc", "tt", "ff", "true", "false",
        ):
            return True
        return False

    def parse_ite(self) -> A.Expr:
        sp = self.span()
        self.expect("kw", "if")
        if self.at("sym", "["):
            # decision guard: a one-alternative choice introduction
            intro = self.parse_choice_intro()
            if len(intro.names) != 1:
                raise DapplSyntaxError(
                    "an if-guard decision must have exactly one alternative",
                    sp.line, sp.col,
                )
            guard = intro
        else:
            guard = self.parse_pure()
        self.expect("kw", "then")
        then = self.parse_expr_no_seq()
        self.expect("kw", "else")
        els = self.parse_expr_no_seq()
        return A.Ite(span=sp, guard=guard, then=then, els=els)

    def parse_choose(self) -> A.Expr:
        sp = self.span()
        self.expect("kw", "choose")
        if self.at("sym", "["):
            scrut = self.parse_choice_intro()
        elif self.at("kw", "disc"):
            scrut = self.parse_disc()
        else:
            scrut = A.ScrutVar(span=self.span(), name=self.expect("ident").text)
        if self.at("kw", "with"):  # optional ML-style keyword before the arms
            self.next()
        arms = []
        while self.at("sym", "|"):
            self.next()
            name = self.expect("ident").text
            self.expect("sym", "->")
            arms.append((name, self.parse_expr_no_seq()))
        if not arms:
            self.error("choose requires at least one '| name -> expr' arm")
        return A.Choose(span=sp, scrutinee=scrut, arms=tuple(arms))

    def parse_choice_intro(self) -> A.ChoiceIntro:
        sp = self.span()
        self.expect("sym", "[")
        names = [self.expect("ident").text]
        while self.at("sym", ","):
            self.next()
            names.append(self.expect("ident").text)
        self.expect("sym", "]")
        if len(set(names)) != len(names):
            raise DapplSyntaxError("duplicate alternative names", sp.line, sp.col)
        return A.ChoiceIntro(span=sp, names=tuple(names))

    def parse_disc(self) -> A.Disc:
        sp = self.span()
        self.expect("kw", "disc")
        self.expect("sym", "[")
        pairs = []
        while True:
            name = self.expect("ident").text
            self.expect("sym", ":")
            pairs.append((name, self.number(allow_negative=False)))
            if self.at("sym", ","):
                self.next()
                continue
            break
        self.expect("sym", "]")
        names = [n for n, _ in pairs]
        if len(set(names)) != len(names):
            raise DapplSyntaxError("duplicate outcome names", sp.line, sp.col)
        return A.Disc(span=sp, pairs=tuple(pairs))

    # -- pure terms ---------------------------------------------------------------

    def parse_pure(self) -> A.Pure:
        left = self.parse_pure_and()
        while self.at("sym", "||"):
            sp = self.span()
            self.next()
            left = A.POr(span=sp, left=left, right=self.parse_pure_and())
        return left

    def parse_pure_and(self) -> A.Pure:
        left = self.parse_pure_unary()
        while self.at("sym", "&&"):
            sp = self.span()
            self.next()
            left = A.PAnd(span=sp, left=left, right=self.parse_pure_unary())
        return left

    def parse_pure_unary(self) -> A.Pure:
        sp = self.span()
        if self.at("sym", "!"):
            self.next()
            return A.PNot(span=sp, operand=self.parse_pure_unary())
        if self.at("kw", "tt") or self.at("kw", "true"):
            self.next()
            return A.PLit(span=sp, value=True)
        if self.at("kw", "ff") or self.at("kw", "false"):
            self.next()
            return A.PLit(span=sp, value=False)
        if self.at("ident"):
            return A.PVar(span=sp, name=self.next().text)
        if self.at("sym", "("):
            self.next()
            inner = self.parse_pure()
            self.expect("sym", ")")
            return inner
        self.error(f"expected a Boolean term, found {self.peek().text!r}")


def parse(source: str) -> A.Expr:
    """Parse a program; sugar is preserved in the AST."""
    return Parser(source).parse_program()
