# swarmx.py
from dotenv import load_dotenv

load_dotenv()  # before config reads SWARMX_* variables

from cli import cli  # noqa: E402


def main():
    cli(prog_name="swarmx")


if __name__ == "__main__":
    main()
