"""FastAPI app exposing the wire protocol: /generate, /fill-mask, /health."""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .engine import MlmEngine, Seq2SeqEngine


class GenerateRequest(BaseModel):
    input: str
    max_new_units: int = Field(default=256, gt=0)


class GenerateResponse(BaseModel):
    output: str


class FillMaskRequest(BaseModel):
    input: str
    candidates: list[str] = Field(min_length=1)


class FillMaskResponse(BaseModel):
    chosen: str
    scores: dict[str, float]


class HealthResponse(BaseModel):
    status: str
    model: str


def create_app(engine: Seq2SeqEngine | MlmEngine) -> FastAPI:
    app = FastAPI(title="absa-inference-server")

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", model=engine.name)

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest):
        if not isinstance(engine, Seq2SeqEngine):
            raise HTTPException(status_code=400, detail="server is not in seq2seq mode")
        return GenerateResponse(output=engine.generate(req.input, req.max_new_units))

    @app.post("/fill-mask", response_model=FillMaskResponse)
    def fill_mask(req: FillMaskRequest):
        if not isinstance(engine, MlmEngine):
            raise HTTPException(status_code=400, detail="server is not in mlm mode")
        try:
            chosen, scores = engine.fill_mask(req.input, req.candidates)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return FillMaskResponse(chosen=chosen, scores=scores)

    return app
