import math
from typing import List, Optional

import typer
from rich.console import Console
from rich.table import Table

from logger import setup_logger
from main import CSV_COLUMNS, MetricsRecord
from processors.processor_factory import create_processor
from src.errors import LaplacianError

# Настройка логирования
logger = setup_logger("app", log_file="lamg.log")

app = typer.Typer(name="lamg", help="Многоуровневый решатель для лапласианов графов: бенчмарк и иерархия.",
                  no_args_is_help=True)
console = Console()


def _format(value):
    if isinstance(value, float):
        return "-" if math.isnan(value) else f"{value:.4g}"
    return str(value)


def render_records(records: List[MetricsRecord], title="Результаты"):
    """Вывод сводной таблицы метрик в консоль"""
    table = Table(title=title)
    for column in CSV_COLUMNS:
        table.add_column(column, justify="right" if column != "name" else "left")
    table.add_column("error", style="red")
    for record in records:
        table.add_row(*[_format(v) for v in record.csv_row().values()], record.error or "")
    console.print(table)


def run_processor(processor):
    """Выполнение процессора с обработкой Ctrl+C"""
    results = []
    try:
        for result in processor.process():
            results.append(result)
    except KeyboardInterrupt:
        console.print(processor.cancel())
        processor.save_checkpoint()
    return results


@app.command()
def solve(
    input: str = typer.Option(..., "--input", "-i", help="Путь к .mtx или генератор gen:<вид>:<размер>"),
    mode: str = typer.Option("adjacency", help="Трактовка матрицы: adjacency или laplacian"),
    correction: str = typer.Option("adaptive", help="Коррекция для t_solve: flat или adaptive"),
    gamma: Optional[float] = typer.Option(None, help="Индекс цикла"),
    guard: Optional[float] = typer.Option(None, help="Предохранитель сложности цикла"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Требуемое уменьшение невязки"),
    seed: Optional[int] = typer.Option(None, help="Зерно генератора случайных чисел"),
    out: str = typer.Option("results", "--out", "-o", help="Каталог результатов"),
):
    """
    Построение иерархии и решение системы с s-t правой частью
    """
    logger.info(f"Starting solve for {input}")
    try:
        processor = create_processor(input, out, mode=mode, correction=correction, gamma=gamma,
                                     guard=guard, tolerance=tol, seed=seed)
    except (LaplacianError, ValueError) as e:
        console.print(f"[red]Ошибка конфигурации:[/red] {e}")
        raise typer.Exit(code=2)
    records = run_processor(processor)
    render_records(records)
    if any(r.error for r in records):
        raise typer.Exit(code=1)


@app.command()
def bench(
    suite: str = typer.Option(..., "--suite", "-s", help="YAML-файл набора случаев"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Каталог результатов"),
):
    """
    Запуск набора случаев с сохранением сводки после каждого
    """
    logger.info(f"Starting benchmark suite {suite}")
    try:
        processor = create_processor(suite, out)
    except (LaplacianError, ValueError, OSError) as e:
        console.print(f"[red]Ошибка загрузки набора:[/red] {e}")
        raise typer.Exit(code=2)
    records = run_processor(processor)
    render_records(records, title=f"Набор {suite}")
    failed = sum(1 for r in records if r.error)
    if failed:
        console.print(f"[yellow]Случаев с ошибками: {failed}/{len(records)}[/yellow]")


@app.command()
def hierarchy(
    input: str = typer.Option(..., "--input", "-i", help="Путь к .mtx или генератор gen:<вид>:<размер>"),
    mode: str = typer.Option("adjacency", help="Трактовка матрицы: adjacency или laplacian"),
    gamma: Optional[float] = typer.Option(None, help="Индекс цикла"),
    out: str = typer.Option("results", "--out", "-o", help="Каталог результатов"),
):
    """
    Только построение иерархии и вывод таблицы уровней
    """
    try:
        processor = create_processor(input, out, hierarchy_only=True, mode=mode, gamma=gamma)
        results = run_processor(processor)
    except (LaplacianError, ValueError, OSError) as e:
        console.print(f"[red]Ошибка:[/red] {e}")
        raise typer.Exit(code=2)
    for info in results:
        table = Table(title=f"{info['name']}: n={info['n']}, m={info['m']}, компонент={info['components']}")
        for column in ("level", "kind", "n", "m", "gamma", "nu_pre", "nu_post", "K"):
            table.add_column(column, justify="right")
        for row in info["levels"]:
            table.add_row(*[_format(row.get(c, "")) for c in ("level", "kind", "n", "m", "gamma",
                                                                 "nu_pre", "nu_post", "K")])
        console.print(table)
        console.print(f"Сложность по рёбрам: {info['edge_complexity']:.3f}, "
                      f"грубейший решатель: {info['coarsest_solver']}")


if __name__ == "__main__":
    app()
