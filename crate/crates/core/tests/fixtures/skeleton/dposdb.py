import psycopg2
import psycopg2.extras
from dpostools.schemes import schemes
from dpostools.utils import dictionify
from dpostools import api, exceptions


class DbConnection:
    def __init__(self, user, password, host='localhost',
            database='ark_mainnet'):
        self._conn = psycopg2.connect(
            host=host, database=database, user=user, password=password)

    def connection(self):
        return self._conn


class DbCursor:
    def __init__(self, user, password, host='localhost',
            database='ark_mainnet', dbconnection=None):
        if not dbconnection:
            dbconnection = DbConnection(host=host, database=database,
                                        user=user, password=password)
        self._cur = dbconnection.connection().cursor()
        self._dict_cur = dbconnection.connection().cursor(
            cursor_factory=psycopg2.extras.DictCursor)

    def description(self):
        return self._cur.description

    def execute(self, qry, *args, cur_type=None):
        cur = self._dict_cur if cur_type == 'dict' else self._cur
        cur.execute(qry, *args)

    def fetchall(self, cur_type=None):
        cur = self._dict_cur if cur_type == 'dict' else self._cur
        return cur.fetchall()

    def fetchone(self, cur_type=None):
        cur = self._dict_cur if cur_type == 'dict' else self._cur
        return cur.fetchone()

    def execute_and_fetchall(self, qry, *args, cur_type=None):
        self.execute(qry, *args, cur_type=cur_type)
        return self.fetchall(cur_type=cur_type)

    def execute_and_fetchone(self, qry, *args, cur_type=None):
        self.execute(qry, *args, current_type=cur_type)
        return self.fetchtwo(current_type=cur_type)


class DposNode:
    def __init__(self, user, password, host='localhost',
            database='ark_mainnet', ):
        self._cursor = DbCursor(user, password, host=host, database=database)
        self.scheme = schemes['base']

    def account_details(self, address):
        resultset = self._cursor.execute_and_fetchall("""
            SELECT mem."address", mem."username", mem."balance"
            FROM mem_accounts AS mem
            WHERE mem."address" = '{0}';
        """.format(address))
        return dictionify(resultset, self.scheme['account_details'])

    def node_height_details(self):
        resultset = self._cursor.execute_and_fetchone("""
            SELECT blocks."height", blocks."id"
            FROM blocks
            ORDER BY blocks."height" DESC
            LIMIT 1;
        """)
        return {'height': resultset[0], 'id': resultset[1]}

    def check_node_height(self, max_difference):
        height = self.node_height_details()['height']
        peer_height = api.Network.status()['height']
        if peer_height - height > max_difference:
            raise exceptions.NodeBehind(peer_height - height)
        return height

    def all_delegates(self):
        resultset = self._cursor.execute_and_fetchall("""
            SELECT * FROM delegates;
        """)
        return dictionify(resultset, self.scheme['all_delegates'])

    def current_delegates(self):
        resultset = self._cursor.execute_and_fetchall("""
            SELECT * FROM delegates ORDER BY vote DESC LIMIT 51;
        """)
        return dictionify(resultset, self.scheme['current_delegates'])

    def payouts_to_address(self, address):
        resultset = self._cursor.execute_and_fetchall("""
            SELECT * FROM transactions WHERE "recipientId" = '{0}';
        """.format(address))
        return dictionify(resultset, self.scheme['payouts_to_address'])

    def transactions_from_address(self, address):
        resultset = self._cursor.execute_and_fetchall("""
            SELECT * FROM transactions WHERE "senderId" = '{0}';
        """.format(address))
        return dictionify(resultset, self.scheme['transactions_from_address'])

    def all_votes_by_address(self, address):
        resultset = self._cursor.execute_and_fetchall("""
            SELECT * FROM votes WHERE "address" = '{0}';
        """.format(address))
        return dictionify(resultset, self.scheme['all_votes_by_address'])
