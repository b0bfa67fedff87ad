import click
import uvicorn

from .app import create_app
from .engine import ModelSpec, load_engine


@click.group()
def main():
    """Reference inference server for the ABSA prompt toolkit."""


@main.command()
@click.option("--model", required=True, help="model id or local checkpoint path")
@click.option("--mode", type=click.Choice(["seq2seq", "mlm"]), required=True)
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--device", default="cpu")
@click.option("--max-input-length", type=int, default=512)
def serve(model, mode, port, host, device, max_input_length):
    """Load a checkpoint and serve /generate, /fill-mask and /health."""
    spec = ModelSpec(model=model, mode=mode, max_input_length=max_input_length, device=device)
    engine = load_engine(spec)
    uvicorn.run(create_app(engine), host=host, port=port)


if __name__ == "__main__":
    main()
