"""Built-in fake value generators.

Each generator has the signature ``fn(params, bundle, state, rng) -> str``
and takes all locale-dependent material from ``bundle``.
"""
from __future__ import annotations

import math
import unicodedata

from docsynth.values.locale import LocaleBundle

_DIGITS = "0123456789"
_LETTERS = "ABCDEFGHJKLMNPQRSTUVWXYZ"


def _fill_pattern(pattern: str, rng) -> str:
    # '#' -> digit, '?' -> letter, anything else literal
    out = []
    for ch in pattern:
        if ch == "#":
            out.append(rng.choice(_DIGITS))
        elif ch == "?":
            out.append(rng.choice(_LETTERS))
        else:
            out.append(ch)
    return "".join(out)


def _ascii(text: str) -> str:
    norm = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in norm if ch.isascii() and (ch.isalnum() or ch in "._-"))


def gen_name(params, bundle: LocaleBundle, state, rng) -> str:
    first = bundle.pick("first_names", rng)
    last = bundle.pick("last_names", rng)
    if bundle.locale == "es" and rng.random() < 0.7:
        # Spanish names usually carry both surnames
        return f"{first} {last} {bundle.pick('last_names', rng)}"
    return f"{first} {last}"


def gen_company(params, bundle: LocaleBundle, state, rng) -> str:
    form = rng.below(4)
    if form == 0:
        name = bundle.pick("company_words", rng) + bundle.pick("company_words", rng).lower()
        return f"{name} {bundle.pick('industries', rng)}"
    if form == 1:
        return (f"{bundle.pick('company_words', rng)} {bundle.pick('industries', rng)} "
                f"{bundle.pick('company_suffixes', rng)}")
    if form == 2:
        return f"{bundle.pick('last_names', rng)} {bundle.pick('company_suffixes', rng)}"
    return f"{bundle.pick('industries', rng)} {bundle.pick('company_words', rng)}"


def gen_address(params, bundle: LocaleBundle, state, rng) -> str:
    fmt = bundle.formats
    number = rng.randint(1, 9999 if bundle.locale == "en" else 199)
    street = bundle.pick("streets", rng)
    street_type = bundle.pick("street_types", rng)
    if bundle.locale == "es":
        line1 = f"{street_type} {street}, {number}"
        city_line = f"{rng.randint(1000, 52999):05d} {bundle.pick('cities', rng)}"
    else:
        line1 = f"{number} {street} {street_type}"
        city_line = (f"{bundle.pick('cities', rng)}, {bundle.pick('regions', rng)} "
                     f"{rng.randint(10000, 99999):05d}")
    lines = [line1]
    if rng.random() < 0.35:
        lines.append(rng.choice(fmt.address_unit).format(n=rng.randint(1, 40)))
    lines.append(city_line)
    if rng.random() < 0.25:
        lines.append(fmt.country)
    return "\n".join(lines)


def gen_date(params, bundle: LocaleBundle, state, rng) -> str:
    months = bundle.lists["months"]
    year = rng.randint(2015, 2025)
    month = rng.randint(1, 12)
    day = rng.randint(1, 28)
    bundle.draws["date_formats"] += 1
    pattern = params.format or rng.choice(bundle.formats.date_formats)
    month_name = months[month - 1]
    return pattern.format(d=day, dd=f"{day:02d}", m=month, mm=f"{month:02d}", yyyy=year,
                          yy=f"{year % 100:02d}", month=month_name, mon=month_name[:3])


def gen_phone(params, bundle: LocaleBundle, state, rng) -> str:
    bundle.draws["phone_formats"] += 1
    pattern = params.format or rng.choice(bundle.formats.phone_formats)
    return _fill_pattern(pattern, rng)


def gen_email(params, bundle: LocaleBundle, state, rng) -> str:
    first = _ascii(bundle.pick("first_names", rng)).lower()
    last = _ascii(bundle.pick("last_names", rng)).lower()
    sep = rng.choice([".", "_", ""])
    return f"{first}{sep}{last}@{bundle.pick('domains', rng)}"


def format_amount(value: float, bundle: LocaleBundle) -> str:
    fmt = bundle.formats
    whole, frac = f"{value:,.2f}".split(".")
    whole = whole.replace(",", fmt.thousands_sep)
    return f"{whole}{fmt.decimal_sep}{frac}"


def gen_currency_amount(params, bundle: LocaleBundle, state, rng) -> str:
    lo = params.min_value if params.min_value is not None else 1.0
    hi = params.max_value if params.max_value is not None else 10000.0
    # log-uniform gives a realistic spread of magnitudes
    if lo > 0:
        value = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    else:
        value = rng.uniform(lo, hi)
    symbol = state.token("currency", rng, default=bundle.formats.default_currency)
    amount = format_amount(value, bundle)
    if bundle.formats.currency_suffix:
        return f"{amount} {symbol}"
    return f"{symbol}{amount}"


def gen_alphanumeric_id(params, bundle: LocaleBundle, state, rng) -> str:
    if params.format:
        return _fill_pattern(params.format, rng)
    prefixes = ("", "INV-", "PO-", "#", "ID", "REF-", "A")
    prefix = rng.choice(prefixes)
    length = rng.randint(4, 10)
    body = "".join(rng.choice(_DIGITS + _LETTERS) if rng.random() < 0.3 else rng.choice(_DIGITS)
                   for _ in range(length))
    text = prefix + body
    if params.max_length is not None and len(text) > params.max_length:
        text = body[: int(params.max_length)]
    return text


def gen_integer_quantity(params, bundle: LocaleBundle, state, rng) -> str:
    lo = int(params.min_value) if params.min_value is not None else 1
    hi = int(params.max_value) if params.max_value is not None else 50
    value = rng.randint(lo, hi)
    if bundle.locale == "es":
        return f"{value:,}".replace(",", ".")
    return f"{value:,}"


def gen_free_text(params, bundle: LocaleBundle, state, rng) -> str:
    n = rng.randint(2, 5)
    words = [bundle.pick("words", rng) for _ in range(n)]
    words[0] = words[0].capitalize()
    return " ".join(words)


BUILTIN_GENERATORS = {
    "name": gen_name,
    "company": gen_company,
    "address_multi_line": gen_address,
    "date": gen_date,
    "phone": gen_phone,
    "email": gen_email,
    "currency_amount": gen_currency_amount,
    "alphanumeric_id": gen_alphanumeric_id,
    "integer_quantity": gen_integer_quantity,
    "free_text": gen_free_text,
}

# aliases seen in existing schemas
BUILTIN_GENERATORS["address"] = gen_address
BUILTIN_GENERATORS["text"] = gen_free_text
