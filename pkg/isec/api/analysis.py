"""Analysis API endpoints."""

from __future__ import annotations

import logging
from typing import Callable, TypeVar

from fastapi import APIRouter, Depends, HTTPException, Request
from pydantic import BaseModel, Field, ValidationError

from isec.core.config import Settings, get_settings
from isec.core.errors import ConsistencyError, IsecError
from isec.domain.constants import Frontier, QIConstants
from isec.domain.documents import InstanceDocument, Number, RegularityParams, SectionDocument
from isec.domain.fibration import Section
from isec.domain.reports import (
    ConesReport,
    FrontierAnalysisReport,
    QICheckReport,
    RegularityTransferReport,
)
from isec.infrastructure.cache import FrontierCache, fingerprint
from isec.services.qi_analysis import qi_frontier
from isec.services.regularity import build_regularity_report, transfer_regularity
from isec.services.reporting import check_report, cones_report, frontier_report

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/analysis", tags=["analysis"])

T = TypeVar("T")


class SectionRequest(BaseModel):
    """An instance document and a section of it."""

    instance: InstanceDocument
    section: SectionDocument


class ConstantsRequest(SectionRequest):
    L: Number = Field(default=1, description="Multiplicative constant")
    M: Number = Field(default=0, description="Additive constant")


class RegularityRequest(ConstantsRequest):
    """Transfer regularity from ``reference`` (default: the section itself) to ``section``."""

    reference: SectionDocument | None = None
    reference_L: Number = 1
    reference_M: Number = 0
    regularity: RegularityParams = Field(default_factory=RegularityParams)


def get_cache(request: Request) -> FrontierCache:
    """Provide the shared frontier cache."""
    cache = getattr(request.app.state, "cache", None)
    if cache is None:
        cache = FrontierCache()
        request.app.state.cache = cache
    return cache


def get_app_settings(request: Request) -> Settings:
    settings = getattr(request.app.state, "settings", None)
    if settings is None:
        settings = get_settings()
        request.app.state.settings = settings
    return settings


def _guarded(action: Callable[[], T]) -> T:
    try:
        return action()
    except ValidationError as exc:
        detail = [
            {"loc": [str(part) for part in error["loc"]], "msg": error["msg"], "type": error["type"]}
            for error in exc.errors()
        ]
        raise HTTPException(status_code=422, detail=detail) from exc
    except ConsistencyError as exc:
        logger.error("consistency failure: %s", exc)
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    except IsecError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _section(body: SectionRequest, settings: Settings) -> Section:
    fibration = body.instance.build(settings.tolerance)
    return body.section.build(fibration)


def _constants(section: Section, L: Number, M: Number) -> QIConstants:
    space = section.space
    return QIConstants(L=space.coerce(L), M=space.coerce(M))


def _frontier(body: SectionRequest, section: Section, cache: FrontierCache) -> Frontier:
    key = fingerprint(body.instance, body.section)
    frontier = cache.get(key)
    if frontier is None:
        frontier = qi_frontier(section)
        cache.set(key, frontier)
    else:
        logger.debug("frontier cache hit %s", key[:12])
    return frontier


@router.post("/check", response_model=QICheckReport)
def check(
    body: ConstantsRequest,
    cache: FrontierCache = Depends(get_cache),
    settings: Settings = Depends(get_app_settings),
) -> QICheckReport:
    """Decide (L, M)-QI of the section and return its optimal constants."""

    def action() -> QICheckReport:
        section = _section(body, settings)
        return check_report(
            section,
            _constants(section, body.L, body.M),
            seed=settings.seed,
            inputs={"L": body.L, "M": body.M},
            frontier=_frontier(body, section, cache),
            oracle=settings.oracle_checks,
        )

    return _guarded(action)


@router.post("/frontier", response_model=FrontierAnalysisReport)
def frontier(
    body: SectionRequest,
    cache: FrontierCache = Depends(get_cache),
    settings: Settings = Depends(get_app_settings),
) -> FrontierAnalysisReport:
    """Return the exact frontier of admissible constants."""

    def action() -> FrontierAnalysisReport:
        section = _section(body, settings)
        return frontier_report(
            section,
            seed=settings.seed,
            frontier=_frontier(body, section, cache),
            oracle=settings.oracle_checks,
        )

    return _guarded(action)


@router.post("/cones", response_model=ConesReport)
def cones(
    body: ConstantsRequest,
    settings: Settings = Depends(get_app_settings),
) -> ConesReport:
    def action() -> ConesReport:
        section = _section(body, settings)
        return cones_report(
            section,
            _constants(section, body.L, body.M),
            seed=settings.seed,
            inputs={"L": body.L, "M": body.M},
            oracle=settings.oracle_checks,
        )

    return _guarded(action)


@router.post("/regularity", response_model=RegularityTransferReport)
def regularity(
    body: RegularityRequest,
    settings: Settings = Depends(get_app_settings),
) -> RegularityTransferReport:
    """Estimate regularity of the reference section and transfer it to the section."""

    def action() -> RegularityTransferReport:
        section = _section(body, settings)
        reference = body.reference.build(section.fibration) if body.reference else section
        params = body.regularity
        report = build_regularity_report(
            reference,
            _constants(reference, body.reference_L, body.reference_M),
            params.Q,
            params.r0,
            params.r_grid,
            threads=settings.threads,
        )
        transfer = transfer_regularity(
            section, report, body.L, body.M, params.r_grid, threads=settings.threads
        )
        return transfer.model_copy(
            update={"seed": settings.seed, "inputs": {"L": body.L, "M": body.M}}
        )

    return _guarded(action)
