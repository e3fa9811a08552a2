from .findings import CheckFinding, CheckReport, render_report
from .spelling import base_dictionary, load_wordlist, parse_wordlist, spell_check
from .suite import alt_text_check, quiz_check, run_checks
from .urls import FixtureUrlProber, HttpUrlProber, ProbePolicy, UrlProber, url_check

__all__ = [
    "CheckFinding", "CheckReport", "FixtureUrlProber", "HttpUrlProber", "ProbePolicy", "UrlProber",
    "alt_text_check", "base_dictionary", "load_wordlist", "parse_wordlist", "quiz_check", "render_report",
    "run_checks", "spell_check", "url_check",
]
