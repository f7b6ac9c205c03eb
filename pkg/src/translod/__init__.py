"""Publish and interlink transport data (Passim, NEPTUNE) as Linked Data."""

from .kernels import BACKEND
from .rdf import BlankNode, Graph, Iri, Literal, NamespaceMap, Triple, expand_qname
from .serializers import parse_ntriples, serialize_ntriples, serialize_turtle

__version__ = "0.1.0"
