"""Chess with full rules, the Chess960 start-position variant and a move cap.

Board: 10x12 mailbox, ``sq = 21 + file + 10 * rank``. Pieces are signed ints
(white positive): pawn 1, knight 2, bishop 3, rook 4, queen 5, king 6.

Castling rights are stored as the set of rook squares that may still castle,
which covers both the standard array and every Chess960 array. Castling is
written ``e1g1`` in standard mode and king-takes-own-rook (``e1h1``) in the
variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..kernel import (
    Engine,
    Game,
    GameId,
    IllegalMove,
    InvalidSetup,
    Mode,
    NotTerminal,
    RawOutcome,
    TerminalState,
    Termination,
    register,
    wdl_outcome,
)
from ..rng import SeededRng

PAWN, KNIGHT, BISHOP, ROOK, QUEEN, KING = range(1, 7)
OFF = 99
STANDARD_INDEX = 518
MAX_MOVES = 200

KNIGHT_STEPS = (-21, -19, -12, -8, 8, 12, 19, 21)
DIAG = (-11, -9, 9, 11)
ORTHO = (-10, -1, 1, 10)
ALL_DIRS = DIAG + ORTHO
PIECE_CHARS = ".PNBRQK"
PROMO_CHARS = {"q": QUEEN, "r": ROOK, "b": BISHOP, "n": KNIGHT}

NORMAL, EN_PASSANT, CASTLE, DOUBLE_PUSH, PROMOTION = range(5)

SQUARES = [21 + f + 10 * r for r in range(8) for f in range(8)]
SQ_NAME = {sq: "abcdefgh"[(sq - 21) % 10] + str((sq - 21) // 10 + 1) for sq in SQUARES}
NAME_SQ = {v: k for k, v in SQ_NAME.items()}


def square(name: str) -> int:
    return NAME_SQ[name]


def file_of(sq: int) -> int:
    return (sq - 21) % 10


def rank_of(sq: int) -> int:
    return (sq - 21) // 10


def _build_rays() -> dict[int, dict[int, tuple[int, ...]]]:
    rays = {}
    for sq in SQUARES:
        per = {}
        for d in ALL_DIRS:
            out = []
            s = sq + d
            while s in SQ_NAME:
                out.append(s)
                s += d
            per[d] = tuple(out)
        rays[sq] = per
    return rays


RAYS = _build_rays()
_LIGHT = {sq for sq in SQUARES if (file_of(sq) + rank_of(sq)) % 2 == 1}

# knight placements over the five squares left after bishops and queen
_KNIGHT_TABLE = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


class IndexOutOfRange(ValueError):
    pass


def chess960_back_rank(index: int) -> str:
    """Back rank (files a..h, uppercase) for Scharnagl start-position number ``index``."""
    if not 0 <= index < 960:
        raise IndexOutOfRange(f"Chess960 index {index} outside [0, 960)")
    rank: list[str | None] = [None] * 8
    n, light = divmod(index, 4)
    rank[light * 2 + 1] = "B"
    n, dark = divmod(n, 4)
    rank[dark * 2] = "B"
    n, queen = divmod(n, 6)
    free = [i for i in range(8) if rank[i] is None]
    rank[free[queen]] = "Q"
    free = [i for i in range(8) if rank[i] is None]
    for k in _KNIGHT_TABLE[n]:
        rank[free[k]] = "N"
    free = [i for i in range(8) if rank[i] is None]
    for i, piece in zip(free, "RKR"):
        rank[i] = piece
    return "".join(rank)  # type: ignore[arg-type]


def attacked(board, sq: int, by_white: bool) -> bool:
    """Is ``sq`` attacked by the given side?"""
    s = 1 if by_white else -1
    pawn = PAWN * s
    if by_white:
        if board[sq - 9] == pawn or board[sq - 11] == pawn:
            return True
    elif board[sq + 9] == pawn or board[sq + 11] == pawn:
        return True
    knight = KNIGHT * s
    for d in KNIGHT_STEPS:
        if board[sq + d] == knight:
            return True
    king = KING * s
    bishop, rook, queen = BISHOP * s, ROOK * s, QUEEN * s
    for d in DIAG:
        t = sq + d
        p = board[t]
        if p == king:
            return True
        while p == 0:
            t += d
            p = board[t]
        if p == bishop or p == queen:
            return True
    for d in ORTHO:
        t = sq + d
        p = board[t]
        if p == king:
            return True
        while p == 0:
            t += d
            p = board[t]
        if p == rook or p == queen:
            return True
    return False


@dataclass(frozen=True, eq=False)
class ChessState:
    game_id: GameId
    board: tuple[int, ...]
    side: int = 0  # 0 white, 1 black
    castling: frozenset[int] = frozenset()
    ep: int = 0
    halfmove: int = 0
    fullmove: int = 1
    ply: int = 0
    history: tuple = ()  # position keys since the last irreversible move
    max_moves: int = MAX_MOVES
    chess960: bool = False
    no_castling: bool = False
    no_en_passant: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def white(self) -> bool:
        return self.side == 0

    def king_square(self, white: bool) -> int:
        return self.board.index(KING if white else -KING)

    def in_check(self) -> bool:
        return attacked(self.board, self.king_square(self.white), not self.white)

    def key(self) -> tuple:
        return (self.board, self.side, self.castling, self._ep_key())

    def _ep_key(self) -> int:
        if not self.ep:
            return 0
        pawn = PAWN if self.white else -PAWN
        back = -10 if self.white else 10
        if self.board[self.ep + back - 1] == pawn or self.board[self.ep + back + 1] == pawn:
            return self.ep
        return 0

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ChessState)
            and self.game_id == other.game_id
            and self.key() == other.key()
            and (self.halfmove, self.fullmove, self.ply, self.history)
            == (other.halfmove, other.fullmove, other.ply, other.history)
        )

    def __hash__(self) -> int:
        return hash(self.key())


# -- move generation -------------------------------------------------------

def _pseudo_moves(st: ChessState) -> list[tuple[int, int, int, int]]:
    b = st.board
    white = st.white
    s = 1 if white else -1
    fwd = 10 * s
    start_rank = 1 if white else 6
    promo_rank = 7 if white else 0
    out = []
    add = out.append
    for sq in SQUARES:
        p = b[sq] * s
        if p <= 0:
            continue
        if p == PAWN:
            t = sq + fwd
            if b[t] == 0:
                if rank_of(t) == promo_rank:
                    for pr in (QUEEN, ROOK, BISHOP, KNIGHT):
                        add((sq, t, pr, PROMOTION))
                else:
                    add((sq, t, 0, NORMAL))
                    if rank_of(sq) == start_rank and b[t + fwd] == 0:
                        add((sq, t + fwd, 0, DOUBLE_PUSH))
            for t in (sq + fwd - 1, sq + fwd + 1):
                q = b[t]
                if q != OFF and q * s < 0:
                    if rank_of(t) == promo_rank:
                        for pr in (QUEEN, ROOK, BISHOP, KNIGHT):
                            add((sq, t, pr, PROMOTION))
                    else:
                        add((sq, t, 0, NORMAL))
                elif t == st.ep and not st.no_en_passant:
                    add((sq, t, 0, EN_PASSANT))
        elif p == KNIGHT or p == KING:
            for d in (KNIGHT_STEPS if p == KNIGHT else ALL_DIRS):
                t = sq + d
                q = b[t]
                if q != OFF and q * s <= 0:
                    add((sq, t, 0, NORMAL))
        else:
            dirs = DIAG if p == BISHOP else ORTHO if p == ROOK else ALL_DIRS
            for d in dirs:
                t = sq + d
                q = b[t]
                while q == 0:
                    add((sq, t, 0, NORMAL))
                    t += d
                    q = b[t]
                if q != OFF and q * s < 0:
                    add((sq, t, 0, NORMAL))
    return out


def _make(board, move: tuple[int, int, int, int], white: bool) -> list[int]:
    fr, to, promo, flag = move
    nb = list(board)
    s = 1 if white else -1
    if flag == CASTLE:
        kdest, rdest = _castle_targets(fr, to)
        nb[fr] = 0
        nb[to] = 0
        nb[kdest] = KING * s
        nb[rdest] = ROOK * s
        return nb
    piece = nb[fr]
    nb[fr] = 0
    nb[to] = promo * s if promo else piece
    if flag == EN_PASSANT:
        nb[to - 10 * s] = 0
    return nb


def _castle_targets(king_sq: int, rook_sq: int) -> tuple[int, int]:
    base = king_sq - file_of(king_sq)
    if rook_sq > king_sq:
        return base + 6, base + 5
    return base + 2, base + 3


def _castle_moves(st: ChessState, ksq: int) -> list[tuple[int, int, int, int]]:
    if st.no_castling or not st.castling:
        return []
    b = st.board
    white = st.white
    s = 1 if white else -1
    out = []
    for rsq in sorted(st.castling):
        if b[rsq] != ROOK * s or rank_of(rsq) != rank_of(ksq) or rank_of(rsq) != (0 if white else 7):
            continue
        kdest, rdest = _castle_targets(ksq, rsq)
        lo = min(ksq, kdest, rsq, rdest)
        hi = max(ksq, kdest, rsq, rdest)
        if any(b[q] != 0 for q in range(lo, hi + 1) if q != ksq and q != rsq):
            continue
        step = 1 if kdest > ksq else -1
        path_board = list(b)
        path_board[ksq] = 0
        if any(attacked(path_board, q, not white) for q in range(ksq + step, kdest, step)):
            continue
        after = _make(b, (ksq, rsq, 0, CASTLE), white)
        if attacked(after, kdest, not white):
            continue
        out.append((ksq, rsq, 0, CASTLE))
    return out


def _legal_moves(st: ChessState) -> list[tuple[int, int, int, int]]:
    b = st.board
    white = st.white
    s = 1 if white else -1
    ksq = b.index(KING * s)
    enemy_white = not white
    # checkers and pins seen from the king
    checkers = []
    pinned: dict[int, int] = {}
    e_bishop, e_rook, e_queen = -BISHOP * s, -ROOK * s, -QUEEN * s
    for d in ALL_DIRS:
        slider = e_bishop if d in DIAG else e_rook
        own = 0
        for t in RAYS[ksq][d]:
            p = b[t]
            if p == 0:
                continue
            if p * s > 0:
                if own:
                    break
                own = t
                continue
            if p == slider or p == e_queen:
                if own:
                    pinned[own] = d
                else:
                    checkers.append(t)
            break
    for d in KNIGHT_STEPS:
        if b[ksq + d] == -KNIGHT * s:
            checkers.append(ksq + d)
    pawn_from = (ksq + 9, ksq + 11) if white else (ksq - 9, ksq - 11)
    for t in pawn_from:
        if b[t] == -PAWN * s:
            checkers.append(t)

    block: set[int] | None = None
    if len(checkers) == 1:
        c = checkers[0]
        block = {c}
        for d in ALL_DIRS:
            ray = RAYS[ksq][d]
            if c in ray and abs(b[c]) in (BISHOP, ROOK, QUEEN):
                block.update(ray[: ray.index(c)])
                break

    no_king = list(b)
    no_king[ksq] = 0
    legal = []
    for mv in _pseudo_moves(st):
        fr, to, _, flag = mv
        if fr == ksq:
            if not attacked(no_king, to, enemy_white):
                legal.append(mv)
            continue
        if len(checkers) > 1:
            continue
        if flag == EN_PASSANT:
            after = _make(b, mv, white)
            if not attacked(after, ksq, enemy_white):
                legal.append(mv)
            continue
        if block is not None and to not in block:
            continue
        if fr in pinned and to not in RAYS[ksq][pinned[fr]]:
            continue
        legal.append(mv)
    if not checkers:
        legal.extend(_castle_moves(st, ksq))
    return legal


def move_token(st: ChessState, mv: tuple[int, int, int, int]) -> str:
    fr, to, promo, flag = mv
    if flag == CASTLE and not st.chess960:
        to = _castle_targets(fr, to)[0]
    return SQ_NAME[fr] + SQ_NAME[to] + ("nbrq"[promo - 2] if promo else "")


def _insufficient(board) -> bool:
    minors = []
    for sq in SQUARES:
        p = abs(board[sq])
        if p in (PAWN, ROOK, QUEEN):
            return False
        if p in (KNIGHT, BISHOP):
            minors.append((p, sq))
    if len(minors) <= 1:
        return True
    if all(p == BISHOP for p, _ in minors):
        colors = {sq in _LIGHT for _, sq in minors}
        return len(colors) == 1
    return False


class ChessEngine(Engine):
    seat_labels = ("White", "Black")

    def __init__(self, mode: Mode):
        self.game_id = GameId(Game.CHESS, mode)

    # -- setup ---------------------------------------------------------
    def initial_state(self, seed: int = 0, **params: Any) -> ChessState:
        max_moves = int(params.pop("max_moves", MAX_MOVES))
        no_castling = bool(params.pop("disable_castling", False))
        no_ep = bool(params.pop("disable_en_passant", False))
        index = params.pop("start_index", None)
        fen = params.pop("fen", None)
        if params:
            raise InvalidSetup(f"unknown chess params {sorted(params)}")
        if max_moves <= 0:
            raise InvalidSetup("max_moves must be positive")
        chess960 = self.game_id.mode is Mode.VARIANT
        if fen is not None:
            st = self.from_fen(fen)
        else:
            if index is None:
                index = SeededRng(seed).randbelow(960) if chess960 else STANDARD_INDEX
            try:
                rank = chess960_back_rank(int(index))
            except IndexOutOfRange as exc:
                raise InvalidSetup(str(exc)) from exc
            st = self.from_fen(f"{rank.lower()}/pppppppp/8/8/8/8/PPPPPPPP/{rank} w - - 0 1")
            rooks = [sq for sq in SQUARES if abs(st.board[sq]) == ROOK]
            st = ChessState(self.game_id, st.board, castling=frozenset(rooks), chess960=chess960)
        return ChessState(
            self.game_id, st.board, st.side, st.castling, st.ep, st.halfmove, st.fullmove,
            0, (st.key(),), max_moves, chess960, no_castling, no_ep,
        )

    def generate_960_start(self, index: int) -> ChessState:
        return self.initial_state(start_index=index)

    # -- core interface ------------------------------------------------
    def _moves(self, st: ChessState) -> dict[str, tuple[int, int, int, int]]:
        moves = st._cache.get("moves")
        if moves is None:
            moves = {move_token(st, mv): mv for mv in _legal_moves(st)}
            st._cache["moves"] = moves
        return moves

    def legal_moves(self, st: ChessState) -> list[str]:
        if self.is_terminal(st):
            raise TerminalState("chess game is over")
        return list(self._moves(st))

    def apply_move(self, st: ChessState, move: str) -> ChessState:
        if self.is_terminal(st):
            raise TerminalState("chess game is over")
        mv = self._moves(st).get(move)
        if mv is None:
            raise IllegalMove(move)
        return self._play(st, mv)

    def _play(self, st: ChessState, mv: tuple[int, int, int, int]) -> ChessState:
        fr, to, promo, flag = mv
        white = st.white
        s = 1 if white else -1
        b = st.board
        moved = abs(b[fr])
        capture = flag == EN_PASSANT or (flag != CASTLE and b[to] != 0)
        nb = tuple(_make(b, mv, white))
        castling = st.castling
        if castling:
            if moved == KING:
                back = 0 if white else 7
                castling = frozenset(r for r in castling if rank_of(r) != back)
            castling = castling - {fr, to}
        ep = fr + 10 * s if flag == DOUBLE_PUSH else 0
        irreversible = moved == PAWN or capture or castling != st.castling
        halfmove = 0 if moved == PAWN or capture else st.halfmove + 1
        nxt = ChessState(
            self.game_id, nb, 1 - st.side, castling, ep, halfmove,
            st.fullmove + (0 if white else 1), st.ply + 1, (),
            st.max_moves, st.chess960, st.no_castling, st.no_en_passant,
        )
        history = (nxt.key(),) if irreversible else st.history + (nxt.key(),)
        object.__setattr__(nxt, "history", history)
        return nxt

    def adjudicate(self, st: ChessState) -> RawOutcome | None:
        """Result of the position, or None while play continues."""
        if "result" in st._cache:
            return st._cache["result"]
        result = None
        if not self._moves(st):
            if st.in_check():
                result = wdl_outcome(1 - st.side, detail="checkmate")
            else:
                result = wdl_outcome(None, detail="stalemate")
        elif st.history.count(st.key()) >= 3:
            result = wdl_outcome(None, detail="threefold repetition")
        elif st.halfmove >= 100:
            result = wdl_outcome(None, detail="fifty-move rule")
        elif _insufficient(st.board):
            result = wdl_outcome(None, detail="insufficient material")
        elif st.ply >= 2 * st.max_moves:
            result = wdl_outcome(None, Termination.MOVE_CAP, f"{st.max_moves}-move cap")
        st._cache["result"] = result
        return result

    def is_terminal(self, st: ChessState) -> bool:
        return self.adjudicate(st) is not None

    def to_move(self, st: ChessState) -> int:
        return st.side

    def outcome(self, st: ChessState) -> RawOutcome:
        result = self.adjudicate(st)
        if result is None:
            raise NotTerminal("chess game still running")
        return result

    def forfeit(self, st: ChessState, seat: int, termination: Termination) -> RawOutcome:
        return wdl_outcome(1 - seat, termination, f"{self.seat_labels[seat]} forfeits")

    def default_move(self, st: ChessState) -> str:
        return self.legal_moves(st)[0]

    def perft(self, st: ChessState, depth: int) -> int:
        if depth == 0:
            return 1
        moves = _legal_moves(st)
        if depth == 1:
            return len(moves)
        # draw rules do not cut the move tree
        return sum(self.perft(self._play(st, mv), depth - 1) for mv in moves)

    # -- text forms ----------------------------------------------------
    def serialize(self, st: ChessState, seat: int | None = None) -> str:
        return self.to_fen(st)

    def to_fen(self, st: ChessState) -> str:
        rows = []
        for r in range(7, -1, -1):
            row = ""
            empty = 0
            for f in range(8):
                p = st.board[21 + f + 10 * r]
                if p == 0:
                    empty += 1
                    continue
                if empty:
                    row += str(empty)
                    empty = 0
                ch = PIECE_CHARS[abs(p)]
                row += ch if p > 0 else ch.lower()
            if empty:
                row += str(empty)
            rows.append(row)
        return " ".join([
            "/".join(rows),
            "w" if st.white else "b",
            self._castling_field(st),
            SQ_NAME[st.ep] if st.ep else "-",
            str(st.halfmove),
            str(st.fullmove),
        ])

    def _castling_field(self, st: ChessState) -> str:
        if not st.castling:
            return "-"
        out = []
        for white in (True, False):
            back = 0 if white else 7
            rooks = sorted((r for r in st.castling if rank_of(r) == back), reverse=True)
            for r in rooks:
                if st.chess960:
                    ch = "abcdefgh"[file_of(r)]
                else:
                    ch = "k" if file_of(r) == 7 else "q"
                out.append(ch.upper() if white else ch)
        return "".join(out)

    def from_fen(self, fen: str) -> ChessState:
        parts = fen.split()
        if len(parts) < 4:
            raise InvalidSetup(f"bad FEN {fen!r}")
        board = [OFF] * 120
        for sq in SQUARES:
            board[sq] = 0
        rows = parts[0].split("/")
        if len(rows) != 8:
            raise InvalidSetup(f"bad FEN placement {parts[0]!r}")
        for i, row in enumerate(rows):
            r = 7 - i
            f = 0
            for ch in row:
                if ch.isdigit():
                    f += int(ch)
                    continue
                if f > 7 or ch.upper() not in PIECE_CHARS[1:]:
                    raise InvalidSetup(f"bad FEN placement {parts[0]!r}")
                p = PIECE_CHARS.index(ch.upper())
                board[21 + f + 10 * r] = p if ch.isupper() else -p
                f += 1
            if f != 8:
                raise InvalidSetup(f"bad FEN placement {parts[0]!r}")
        if board.count(KING) != 1 or board.count(-KING) != 1:
            raise InvalidSetup("each side needs exactly one king")
        side = 0 if parts[1] == "w" else 1
        castling = set()
        for ch in parts[2] if parts[2] != "-" else "":
            white = ch.isupper()
            back = 0 if white else 7
            rook = ROOK if white else -ROOK
            kf = file_of(board.index(KING if white else -KING))
            files = [f for f in range(8) if board[21 + f + 10 * back] == rook]
            c = ch.lower()
            if c == "k":
                files = [f for f in files if f > kf][-1:]
            elif c == "q":
                files = [f for f in files if f < kf][:1]
            elif c in "abcdefgh":
                files = [f for f in files if f == "abcdefgh".index(c)]
            else:
                raise InvalidSetup(f"bad castling field {parts[2]!r}")
            if not files:
                raise InvalidSetup(f"castling right {ch!r} has no rook")
            castling.add(21 + files[0] + 10 * back)
        ep = NAME_SQ[parts[3]] if parts[3] != "-" else 0
        halfmove = int(parts[4]) if len(parts) > 4 else 0
        fullmove = int(parts[5]) if len(parts) > 5 else 1
        chess960 = self.game_id.mode is Mode.VARIANT
        st = ChessState(self.game_id, tuple(board), side, frozenset(castling), ep, halfmove,
                        fullmove, chess960=chess960)
        if attacked(st.board, st.king_square(not st.white), st.white):
            raise InvalidSetup("side not to move is in check")
        object.__setattr__(st, "history", (st.key(),))
        return st


def parse_move_token(token: str) -> tuple[int, int, int]:
    """Split a coordinate move into (from, to, promotion piece or 0)."""
    if len(token) not in (4, 5) or token[:2] not in NAME_SQ or token[2:4] not in NAME_SQ:
        raise IllegalMove(token, "expected coordinate notation like e2e4")
    promo = 0
    if len(token) == 5:
        if token[4] not in PROMO_CHARS:
            raise IllegalMove(token, "bad promotion piece")
        promo = PROMO_CHARS[token[4]]
    return NAME_SQ[token[:2]], NAME_SQ[token[2:4]], promo


for _mode in Mode:
    register(ChessEngine(_mode))
