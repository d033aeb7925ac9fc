import logging

from sqlalchemy import create_engine, inspect
from sqlalchemy import exc as sqlalchemy_exc
from sqlalchemy.orm import declarative_base, sessionmaker
from sqlalchemy.pool import StaticPool
from sqlalchemy.schema import CreateColumn

from cointoss import settings


logger = logging.getLogger(__name__)

DATABASE_URL = settings.DATABASE_URL

if DATABASE_URL == "sqlite://":
    # In-memory archive shared by every session of the process (test runs)
    engine = create_engine(
        DATABASE_URL,
        connect_args={"check_same_thread": False},
        poolclass=StaticPool,
    )
elif DATABASE_URL.startswith("sqlite"):
    engine = create_engine(DATABASE_URL, connect_args={"check_same_thread": False})
else:
    engine = create_engine(DATABASE_URL)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
Base = declarative_base()


def ensure_archive_schema(base, bind=None) -> None:
    """Create missing archive tables and add columns that an older SQLite
    archive file lacks."""
    bind = bind if bind is not None else engine
    base.metadata.create_all(bind=bind)
    if bind.dialect.name != "sqlite":
        return

    inspector = inspect(bind)
    for table in base.metadata.sorted_tables:
        present = {column["name"] for column in inspector.get_columns(table.name)}
        for column in table.columns:
            if column.name in present or column.primary_key:
                continue
            if not column.nullable and column.server_default is None:
                logger.warning("Cannot add %s.%s to the archive: NOT NULL without a default",
                               table.name, column.name)
                continue
            sql = (f'ALTER TABLE "{table.name}" ADD COLUMN '
                   f'{CreateColumn(column).compile(dialect=bind.dialect)}')
            try:
                with bind.begin() as conn:
                    conn.exec_driver_sql(sql)
            except sqlalchemy_exc.OperationalError as exc:
                # SQLite refuses non-constant defaults such as CURRENT_TIMESTAMP here
                logger.warning("Cannot add %s.%s to the archive: %s",
                               table.name, column.name, exc.orig)
                continue
            logger.info("Upgraded archive schema: %s", sql)
