from ui.cli import app


def main():
    # Run the command-line interface
    app(prog_name="plantspace")

if __name__ == "__main__":
    main()
