"""Certificates: writing, completion of weak records and independent checking."""

from .builder import CertificateBuilder, CertificateError, emit_mir_proof, log_and_write
from .checker import Verdict, check_certificate
from .complete import BOUNDS, EXACT_LP, CompletionError, complete_certificate
from .vipr import Certificate, CertificateParseError, Constraint, Derivation, Reason, parse_certificate, write_certificate

__all__ = [
    "BOUNDS",
    "EXACT_LP",
    "Certificate",
    "CertificateBuilder",
    "CertificateError",
    "CertificateParseError",
    "CompletionError",
    "Constraint",
    "Derivation",
    "Reason",
    "Verdict",
    "check_certificate",
    "complete_certificate",
    "emit_mir_proof",
    "log_and_write",
    "parse_certificate",
    "write_certificate",
]
