from mixsing import app

app(prog_name="mixsing")
